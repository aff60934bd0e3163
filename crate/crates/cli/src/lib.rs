//! Command-line front end: ensemble benchmarks, model sweeps, CSV and SVG
//! output.

pub mod cli;
pub mod commands;
pub mod config;
pub mod plot;
pub mod table;

/// 0 ok, 1 usage or configuration problem, 2 numerical failure.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use varprop_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidParameter(_) | E::InvalidTimeGrid => 1,
                _ => 2,
            };
        }
    }
    1
}
