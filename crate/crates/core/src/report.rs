//! Plain-text design reports, metrics tables and trajectory CSV.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use nalgebra::{Dim, Matrix, RawStorage};

use crate::cubic::C64;
use crate::pipeline::{CaseDesign, CaseRun, DesignReport};
use crate::sim::{Sample, Trajectory};

pub const CSV_HEADER: &str = "t,delta,omega,v,p,q,e1,e2";

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn cnum(z: &C64) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{}{}j", num(z.re), sign, num(z.im.abs()))
    }
}

fn matrix_lines<R: Dim, C: Dim, S: RawStorage<f64, R, C>>(
    out: &mut String,
    label: &str,
    m: &Matrix<f64, R, C, S>,
) {
    let pad = " ".repeat(label.len());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:>14}", num(m[(i, j)]))).collect();
        let lead = if i == 0 { label } else { pad.as_str() };
        let _ = writeln!(out, "        {lead} [{} ]", row.join(""));
    }
}

fn render_case(out: &mut String, c: &CaseDesign) {
    let s = &c.spec;
    let _ = writeln!(out, "== case {} (xi = {}, ts = {} s, a = {} 1/s) ==", c.name, s.xi, s.ts, s.a);
    if let Some(op) = &c.op {
        let _ = writeln!(out, "step 1  operating point   delta0 = {}  v0 = {}", num(op.delta0), num(op.v0));
    }
    if let Some(g) = &c.gains {
        let _ = writeln!(
            out,
            "step 2  linearized gains  k_pdelta = {}  k_pv = {}  k_qdelta = {}  k_qv = {}",
            num(g.k_pdelta),
            num(g.k_pv),
            num(g.k_qdelta),
            num(g.k_qv)
        );
    }
    if let Some(p) = &c.plant {
        let _ = writeln!(out, "step 3  state space");
        matrix_lines(out, "A =", &p.a);
        matrix_lines(out, "B =", &p.b);
    }
    if let Some(r) = &c.controllability {
        let _ = writeln!(out, "step 4  controllability");
        matrix_lines(out, "P =", &r.p_matrix);
        let sv: Vec<String> = r.singular_values.iter().map(|v| format!("{v:.6e}")).collect();
        let _ = writeln!(out, "        singular values = {}", sv.join(", "));
        let _ = writeln!(
            out,
            "        rank = {} -> {}",
            r.rank,
            if r.controllable { "controllable" } else { "NOT controllable" }
        );
    }
    if let Some(t) = &c.targets {
        let _ = writeln!(
            out,
            "step 5  targets           omega_n = {}  overshoot = {} %  eigenvalues = {}",
            num(s.natural_frequency()),
            num(s.overshoot()),
            t.as_array().iter().map(cnum).collect::<Vec<_>>().join(", ")
        );
    }
    for w in &c.warnings {
        let _ = writeln!(out, "        warning: {w}");
    }
    if let Some(g) = &c.gain {
        let _ = writeln!(out, "step 6  feedback gain");
        matrix_lines(out, "K =", &g.k);
        let _ = writeln!(
            out,
            "        achieved = {}",
            g.achieved_eigs.iter().map(cnum).collect::<Vec<_>>().join(", ")
        );
        let _ = writeln!(
            out,
            "        max eigenvalue rel. error = {:.3e}  polynomial rel. error = {:.3e}",
            g.max_rel_error, g.poly_rel_error
        );
    }
    match &c.error {
        None => {
            let _ = writeln!(out, "status: ok");
        }
        Some(e) => {
            let _ = writeln!(out, "status: {} ({e})", c.status());
        }
    }
}

/// Deterministic text rendering; identical inputs give identical bytes.
pub fn render_design_report(report: &DesignReport) -> String {
    let sp = &report.system;
    let mut out = String::new();
    out.push_str("gridform design report\n");
    out.push_str("units: angles rad; p, q, v, omega per-unit; omega_b rad/s; time s; eigenvalues 1/s\n");
    let _ = writeln!(
        out,
        "system: omega_b = {}  omega_g = {}  v_g = {}  r_g = {}  x_g = {}  d_p = {}  d_q = {}",
        num(sp.omega_b),
        sp.omega_g,
        sp.v_g,
        sp.r_g,
        sp.x_g,
        sp.d_p,
        sp.d_q
    );
    let _ = writeln!(
        out,
        "setpoints: omega_set = {}  p_set = {}  q_set = {}  v_set = {}",
        sp.omega_set, sp.p_set, sp.q_set, sp.v_set
    );
    let _ = writeln!(out, "placement: {}", report.placement);
    for c in &report.cases {
        out.push('\n');
        render_case(&mut out, c);
    }
    out
}

pub fn render_metrics_table(runs: &[CaseRun]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<16}{:>14}{:>14}{:>14}{:>14}", "case", "overshoot_%", "settling_s", "peak_s", "final");
    for r in runs {
        let cols = match (&r.trajectory, &r.metrics) {
            (Err(e), _) => format!("failed: {e}"),
            (Ok(_), None) => "no event".to_string(),
            (Ok(_), Some(Err(e))) => format!("{e}"),
            (Ok(_), Some(Ok(m))) => format!(
                "{:>14}{:>14}{:>14}{:>14}",
                format!("{:.3}", m.overshoot),
                format!("{:.4}", m.settling_time),
                format!("{:.4}", m.peak_time),
                num(m.final_value)
            ),
        };
        let _ = writeln!(out, "{:<16}{cols}", r.name);
    }
    out
}

/// Writes the trajectory as CSV, 9 significant digits per value.
pub fn write_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for s in &traj.samples {
        writeln!(
            w,
            "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
            s.t, s.delta, s.omega, s.v, s.p, s.q, s.e1, s.e2
        )?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> io::Result<Trajectory> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h == CSV_HEADER => {}
        Some(Ok(h)) => return Err(bad(format!("unexpected header '{h}'"))),
        Some(Err(e)) => return Err(e),
        None => return Err(bad("empty file".into())),
    }
    let mut samples = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let v: Vec<f64> = line
            .split(',')
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", n + 2)))?;
        if v.len() != 8 {
            return Err(bad(format!("row {}: expected 8 columns, got {}", n + 2, v.len())));
        }
        samples.push(Sample { t: v[0], delta: v[1], omega: v[2], v: v[3], p: v[4], q: v[5], e1: v[6], e2: v[7] });
    }
    Ok(Trajectory { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DesignConfig;
    use crate::pipeline::run_design;

    #[test]
    fn report_is_deterministic_and_has_steps() {
        let cfg = DesignConfig::benchmark();
        let a = render_design_report(&run_design(&cfg));
        let b = render_design_report(&run_design(&cfg));
        assert_eq!(a, b);
        for needle in ["step 1", "step 2", "step 3", "step 4", "step 5", "step 6", "controllable"] {
            assert!(a.contains(needle), "missing {needle}");
        }
        assert!(a.contains("delta0 = 0.0435"));
        assert!(a.contains("314.159265"));
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(cnum(&C64::new(-4.0, -9.1651514)), "-4.000000-9.165151j");
        assert_eq!(cnum(&C64::new(-20.0, 0.0)), "-20.000000");
        assert_eq!(num(-1e-9), "0.000000");
    }

    #[test]
    fn csv_header_and_rows() {
        let traj = Trajectory {
            samples: vec![Sample { t: 0.0, delta: 0.0435, omega: 1.0, v: 0.9997, p: 0.5, q: 0.0074, e1: 0.0, e2: -1e-12 }],
        };
        let mut buf = Vec::new();
        write_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(
            lines.next(),
            Some("0.00000000e0,4.35000000e-2,1.00000000e0,9.99700000e-1,5.00000000e-1,7.40000000e-3,0.00000000e0,-1.00000000e-12")
        );
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(read_csv("t,x\n1,2\n".as_bytes()).is_err());
    }
}
