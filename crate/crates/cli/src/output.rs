use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use mpfgmres::diagnostics::AnalysisConstants;
use mpfgmres::fgmres::c0;
use mpfgmres::precision::{Format, PrecisionConfig};
use mpfgmres::problems::PRNG_VERSION;

use crate::config::ExperimentConfig;
use crate::run::{Cell, GridCell, Prepared, RecommendOutcome};
use crate::CliError;

pub const COLUMNS: [&str; 24] = [
    "label", "mode", "uA", "uL", "uR", "IC", "converged", "BE_orig", "BE_leftprec", "FE", "zeta1", "zeta2", "zeta", "rho",
    "psiA", "psiL", "normZk", "normMRdx", "kappaA", "kappaAtilde", "kappaAhat", "kappaML", "kappaMR", "flags",
];

/// Shortest representation that parses back to the same bits.
fn num(v: f64) -> String {
    format!("{v:e}")
}

/// One CSV record in [`COLUMNS`] order.
pub fn row(prep: &Prepared, pc: &PrecisionConfig, cell: Option<&Cell>) -> Vec<String> {
    let head = [prep.problem.label.clone(), prep.precond.mode.to_string(), pc.u_a.name().into(), pc.u_l.name().into(), pc.u_r.name().into()];
    let Some(cell) = cell else {
        let mut r = head.to_vec();
        r.push("0".into());
        r.push("false".into());
        r.extend(std::iter::repeat_n("NaN".to_string(), 16));
        r.push("failed".into());
        return r;
    };
    let (s, d, an) = (&cell.solve, &cell.diagnostics, &prep.analysis);
    let mut flags = d.assumptions.failures();
    if !s.converged {
        flags = if flags.is_empty() { s.termination.to_string() } else { format!("{}|{flags}", s.termination) };
    }
    if flags.is_empty() {
        flags = "ok".into();
    }
    let mut r = head.to_vec();
    r.push(s.iterations.to_string());
    r.push(s.converged.to_string());
    r.extend(
        [
            d.be_original,
            d.be_leftprec,
            d.forward_error,
            d.zeta.zeta1,
            d.zeta.zeta2,
            d.zeta.zeta,
            d.rho,
            d.psi_a,
            d.psi_l,
            s.norm_z,
            s.norm_mr_dx,
            an.kappa_a,
            an.kappa_a_tilde,
            an.kappa_a_hat,
            an.kappa_ml,
            an.kappa_mr,
        ]
        .map(num),
    );
    r.push(flags);
    r
}

pub fn write_rows(path: &Path, rows: &[Vec<String>], extra: Option<&str>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = COLUMNS.to_vec();
    header.extend(extra);
    w.write_record(&header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Extracts one panel value from a finished cell.
pub type PanelValue = fn(&Cell) -> f64;

/// The five heatmap panels: name and per-cell value.
pub const PANELS: [(&str, PanelValue); 5] = [
    ("BE", |c| c.diagnostics.be_original),
    ("FE", |c| c.diagnostics.forward_error),
    ("zeta", |c| c.diagnostics.zeta.zeta),
    ("IC", |c| c.solve.iterations as f64),
    ("rho", |c| c.diagnostics.rho),
];

/// Rows are `u_L`, columns `u_R`; failed cells hold NaN.
pub fn grid_values(cfg: &ExperimentConfig, cells: &[GridCell], value: fn(&Cell) -> f64) -> Vec<Vec<f64>> {
    cells
        .chunks(cfg.u_r_list.len())
        .map(|row| row.iter().map(|c| c.outcome.as_ref().map_or(f64::NAN, value)).collect())
        .collect()
}

fn grid_table(cfg: &ExperimentConfig, values: &[Vec<f64>], show: impl Fn(f64) -> String) -> Vec<Vec<String>> {
    let header = std::iter::once("uL\\uR".to_string()).chain(cfg.u_r_list.iter().map(|f| f.name().to_string()));
    let body = cfg
        .u_l_list
        .iter()
        .zip(values)
        .map(|(f, row)| std::iter::once(f.name().to_string()).chain(row.iter().map(|&v| show(v))).collect());
    std::iter::once(header.collect()).chain(body).collect()
}

fn write_plain(path: &Path, rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn metadata(cfg: &ExperimentConfig, prep: &Prepared) -> String {
    let consts = AnalysisConstants::default();
    let mut s = String::new();
    let _ = writeln!(s, "mpfgmres {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "config_hash = {}", cfg.hash());
    let _ = writeln!(s, "prng = {PRNG_VERSION}");
    for (k, v) in &cfg.settings {
        let _ = writeln!(s, "setting.{k} = {v}");
    }
    let _ = writeln!(s, "factor_format = {}", prep.factor_format.map_or("none", |f| f.name()));
    let _ = writeln!(s, "tol = {}", num(cfg.tol.resolve(cfg.u)));
    let _ = writeln!(s, "maxit = {}", cfg.maxit);
    let _ = writeln!(s, "constant.c = {}", consts.c);
    let _ = writeln!(s, "constant.c13 = {}", consts.c13);
    let _ = writeln!(s, "constant.c0 = {}", num(c0(prep.problem.n())));
    for f in Format::registry() {
        let _ = writeln!(
            s,
            "format.{} = t {} emin {} emax {} u {}",
            f.name(),
            f.significand_bits(),
            f.emin(),
            f.emax(),
            num(f.unit_roundoff())
        );
    }
    s
}

/// Human-readable summary of one run.
pub fn report(prep: &Prepared, cell: &Cell) -> String {
    let (p, s, d, an, pc) = (&prep.problem, &cell.solve, &cell.diagnostics, &prep.analysis, &cell.precisions);
    let mut o = String::new();
    let _ = writeln!(o, "problem      {} (n = {})", p.label, p.n());
    let _ = writeln!(
        o,
        "precond      {}{}",
        prep.precond.mode,
        prep.factor_format.map_or(String::new(), |f| format!(", LU in {f}"))
    );
    let _ = writeln!(o, "precisions   u = {}, uA = {}, uL = {}, uR = {}", pc.u, pc.u_a, pc.u_l, pc.u_r);
    let _ = writeln!(o, "termination  {} after {} iterations (tol {:.3e})", s.termination, s.iterations, s.tol);
    let _ = writeln!(o);
    let _ = writeln!(o, "backward error  {:.3e} (original)  {:.3e} (left-preconditioned)", d.be_original, d.be_leftprec);
    let _ = writeln!(o, "forward error   {:.3e}", d.forward_error);
    let _ = writeln!(o, "zeta            {:.3e} = ({:.3e} + {:.3e}) / scale", d.zeta.zeta, d.zeta.zeta1, d.zeta.zeta2);
    let _ = writeln!(o, "rho             {:.3e}", d.rho);
    let _ = writeln!(o, "psi_A           {:.3e} (bound {:.3e})", d.psi_a, an.psi_a_bound);
    let _ = writeln!(o, "psi_L           {:.3e} (bound {:.3e})", d.psi_l, an.psi_l_bound);
    let _ = writeln!(o, "|Z| |M_R dx|    {:.3e} x {:.3e} = {:.3e}", s.norm_z, s.norm_mr_dx, s.norm_z * s.norm_mr_dx);
    let _ = writeln!(
        o,
        "kappa           A {:.3e}  A~ {:.3e}  A^ {:.3e}  M_L {:.3e}  M_R {:.3e}",
        an.kappa_a, an.kappa_a_tilde, an.kappa_a_hat, an.kappa_ml, an.kappa_mr
    );
    let _ = writeln!(o, "|E_R|/|M_R^-1|  {:.3e} (factor estimate {:.3e})", an.er_ratio(), an.er_ratio_approx);
    let _ = writeln!(o);
    let _ = writeln!(o, "bounds");
    for b in &d.bounds {
        let verdict = if b.satisfied() { "holds" } else { "VIOLATED" };
        let _ = writeln!(o, "  {:<18} {:.3e} <= {:.3e}  {verdict}", b.name, b.measured, b.bound);
    }
    let _ = writeln!(o, "assumptions");
    for a in &d.assumptions.checks {
        let verdict = if a.holds { "holds" } else { "FAILS" };
        let _ = writeln!(o, "  {:<18} {:.3e} <  {:.3e}  {verdict}", a.name, a.value, a.limit);
    }
    o
}

pub fn recommendation_report(prep: &Prepared, rec: &RecommendOutcome) -> String {
    let m = &rec.measurements;
    let c = &rec.recommendation.config;
    let mut o = String::new();
    let _ = writeln!(o, "pilot (uniform double): {} iterations, BE {:.3e}", rec.pilot.solve.iterations, rec.pilot.diagnostics.be_original);
    let _ = writeln!(o, "  psi_A {:.3e}  psi_L {:.3e}  |E_L M_L| {:.3e}", m.psi_a, m.psi_l, m.norm_el_ml);
    let _ = writeln!(o, "  |E_R| / |M_R^-1| {:.3e}", m.norm_er / m.norm_mr_inv);
    let _ = writeln!(o, "recommended: u = {}, uA = {}, uL = {}, uR = {}", c.u, c.u_a, c.u_l, c.u_r);
    for line in &rec.recommendation.rationale {
        let _ = writeln!(o, "  {line}");
    }
    let v = &rec.verification;
    let _ = writeln!(
        o,
        "verification: {} after {} iterations, BE {:.3e} ({:.1} u)",
        v.solve.termination,
        v.solve.iterations,
        v.diagnostics.be_original,
        v.diagnostics.be_original / c.u.unit_roundoff()
    );
    let _ = writeln!(o);
    o.push_str(&report(prep, v));
    o
}

fn out_dir(cfg: &ExperimentConfig) -> Result<Option<&Path>, CliError> {
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

pub fn emit_single(cfg: &ExperimentConfig, prep: &Prepared, cell: &Cell, mut stdout: impl Write) -> Result<(), CliError> {
    let text = report(prep, cell);
    stdout.write_all(text.as_bytes())?;
    if let Some(dir) = out_dir(cfg)? {
        write_rows(&dir.join("results.csv"), &[row(prep, &cell.precisions, Some(cell))], None)?;
        fs::write(dir.join("report.txt"), text)?;
        fs::write(dir.join("metadata.txt"), metadata(cfg, prep))?;
    }
    Ok(())
}

pub fn emit_grid(cfg: &ExperimentConfig, prep: &Prepared, cells: &[GridCell], mut stdout: impl Write) -> Result<(), CliError> {
    for (name, value) in PANELS {
        writeln!(stdout, "{name}")?;
        for line in grid_table(cfg, &grid_values(cfg, cells, value), |v| format!("{v:.3e}")) {
            let cols: Vec<String> = line.iter().map(|v| format!("{v:>11}")).collect();
            writeln!(stdout, "{}", cols.join(" "))?;
        }
        writeln!(stdout)?;
    }
    for c in cells {
        if let Err(e) = &c.outcome {
            writeln!(stdout, "cell uL={} uR={} failed: {e}", c.u_l, c.u_r)?;
        }
    }
    if let Some(dir) = out_dir(cfg)? {
        for (name, value) in PANELS {
            write_plain(&dir.join(format!("grid_{name}.csv")), &grid_table(cfg, &grid_values(cfg, cells, value), num))?;
        }
        let rows: Vec<Vec<String>> = cells
            .iter()
            .map(|c| {
                let pc = cfg.precisions_with(c.u_l, c.u_r);
                let mut r = row(prep, &pc, c.outcome.as_ref().ok());
                r.push(c.outcome.as_ref().err().map_or(String::new(), ToString::to_string));
                r
            })
            .collect();
        write_rows(&dir.join("grid_long.csv"), &rows, Some("reason"))?;
        fs::write(dir.join("metadata.txt"), metadata(cfg, prep))?;
    }
    Ok(())
}

pub fn emit_recommend(cfg: &ExperimentConfig, prep: &Prepared, rec: &RecommendOutcome, mut stdout: impl Write) -> Result<(), CliError> {
    let text = recommendation_report(prep, rec);
    stdout.write_all(text.as_bytes())?;
    if let Some(dir) = out_dir(cfg)? {
        let v = &rec.verification;
        write_rows(&dir.join("results.csv"), &[row(prep, &v.precisions, Some(v))], None)?;
        fs::write(dir.join("recommendation.txt"), text)?;
        fs::write(dir.join("metadata.txt"), metadata(cfg, prep))?;
    }
    Ok(())
}
