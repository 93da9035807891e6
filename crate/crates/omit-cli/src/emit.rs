//! Artifact emission: plot-ready CSV profiles and versioned JSON reports,
//! formatted identically on every run.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use omit_core::Profile;
use serde::Serialize;

use crate::config::CliError;

/// Schema tag stamped into every JSON report.
pub const SCHEMA_VERSION: &str = "1";

/// Renders a swept profile as CSV.
///
/// All numbers carry 17 significant digits so a parsed copy is
/// bit-identical to the source. Profiles with skipped detunings gain a
/// trailing `pole` column; skipped rows leave the response fields empty.
pub fn profile_csv(profile: &Profile) -> Result<String, CliError> {
    let rows = profile.rows();
    if rows.is_empty() {
        return Err(CliError::output("refusing to emit an empty profile"));
    }
    let with_pole = !profile.skipped.is_empty();
    let mut out = String::with_capacity(rows.len() * 128);
    out.push_str("delta,re_eps_out,im_eps_out,re_tp,im_tp,abs_tp2");
    if with_pole {
        out.push_str(",pole");
    }
    out.push('\n');
    for (delta, response) in rows {
        match response {
            Some(r) => {
                write!(
                    out,
                    "{delta:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    r.eps_out.re,
                    r.eps_out.im,
                    r.t_p.re,
                    r.t_p.im,
                    r.t_p.norm_sqr(),
                )
                .expect("string writes cannot fail");
                if with_pole {
                    out.push_str(",0");
                }
            }
            None => {
                write!(out, "{delta:.16e},,,,,").expect("string writes cannot fail");
                out.push_str(",1");
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Renders a report as pretty JSON with a trailing newline.
pub fn json_doc<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::io(format!("serializing report: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn deliver(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::io(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(format!("writing stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use omit_core::{steady_state, sweep, Grid, Method};

    #[test]
    fn csv_round_trips_bit_exactly() {
        let p = omit_core::scenario("fig2").unwrap().params;
        let ss = steady_state(&p).unwrap();
        let grid = Grid {
            min: 0.5,
            max: 1.5,
            count: 21,
        };
        let profile = sweep(&p, &ss, &grid, Method::ClosedForm).unwrap();
        let text = profile_csv(&profile).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "delta,re_eps_out,im_eps_out,re_tp,im_tp,abs_tp2"
        );
        for (line, (delta, response)) in lines.zip(profile.rows()) {
            let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            let r = response.unwrap();
            assert_eq!(fields[0], delta);
            assert_eq!(fields[1], r.eps_out.re);
            assert_eq!(fields[2], r.eps_out.im);
            assert_eq!(fields[3], r.t_p.re);
            assert_eq!(fields[4], r.t_p.im);
            assert_eq!(fields[5], r.t_p.norm_sqr());
        }
    }

    #[test]
    fn empty_profile_is_refused() {
        let profile = Profile {
            method: Method::ClosedForm,
            deltas: vec![],
            responses: vec![],
            skipped: vec![],
        };
        let err = profile_csv(&profile).unwrap_err();
        assert_eq!(err.code, crate::config::EXIT_VALIDATION);
    }
}
