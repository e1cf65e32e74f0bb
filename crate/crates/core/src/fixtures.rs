//! Match files bundled into the binary for `--fixture` runs.

pub const TINY_ODI: &str = include_str!("../fixtures/tiny_odi.json");
pub const WIDE_ODI: &str = include_str!("../fixtures/wide_odi.json");
pub const SUPER_OVER_T20I: &str = include_str!("../fixtures/super_over_t20i.json");
pub const IPL_2016: &str = include_str!("../fixtures/ipl_2016.json");
pub const RAIN_ODI: &str = include_str!("../fixtures/rain_odi.json");
pub const TINY_BALL_LOG: &str = include_str!("../fixtures/tiny_ball_log.csv");
pub const WORKED_SCENARIO: &str = include_str!("../fixtures/worked_scenario.json");
pub const WORKED_FITS: &str = include_str!("../fixtures/worked_fits.json");

/// `(file name, contents)` for every bundled match file.
pub fn match_files() -> [(&'static str, &'static [u8]); 6] {
    [
        ("tiny_odi.json", TINY_ODI.as_bytes()),
        ("wide_odi.json", WIDE_ODI.as_bytes()),
        ("super_over_t20i.json", SUPER_OVER_T20I.as_bytes()),
        ("ipl_2016.json", IPL_2016.as_bytes()),
        ("rain_odi.json", RAIN_ODI.as_bytes()),
        ("tiny_ball_log.csv", TINY_BALL_LOG.as_bytes()),
    ]
}
