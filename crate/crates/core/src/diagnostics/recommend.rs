use crate::error::{Error, Result};
use crate::precision::{Format, PrecisionConfig};

/// Measured quantities from a pilot run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotMeasurements {
    pub psi_a: f64,
    pub psi_l: f64,
    pub norm_el_ml: f64,
    pub norm_er: f64,
    pub norm_mr_inv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub config: PrecisionConfig,
    pub rationale: Vec<String>,
}

/// Tolerance on the "roughly equal" balance `u_X psi_X ~ u`: a format is
/// accepted while `u_X psi_X <= slack * u`.
pub const DEFAULT_SLACK: f64 = 10.0;

fn loosest<F: Fn(&Format) -> bool>(ok: F) -> Option<Format> {
    Format::registry().into_iter().find(ok)
}

/// Picks the loosest registry format for each of `u_A`, `u_L`, `u_R`
/// that keeps its error contribution at the level of the target `u`.
pub fn recommend_precisions(m: &PilotMeasurements, target: Format, slack: f64) -> Result<Recommendation> {
    let u = target.unit_roundoff();
    let limit = slack * u;
    let mut rationale = Vec::new();

    let u_a = loosest(|f| f.unit_roundoff() * m.psi_a <= limit).ok_or_else(|| {
        Error::NoFormatSatisfies(format!("u_A: psi_A = {:.3e} needs u_A <= {:.3e}", m.psi_a, limit / m.psi_a))
    })?;
    rationale.push(format!(
        "u_A = {}: u_A*psi_A = {:.3e} <= {slack}*u = {:.3e} (psi_A = {:.3e})",
        u_a.name(),
        u_a.unit_roundoff() * m.psi_a,
        limit,
        m.psi_a
    ));

    let need_l = m.psi_l.max(m.norm_el_ml);
    let u_l = loosest(|f| f.unit_roundoff() * need_l <= limit).ok_or_else(|| {
        Error::NoFormatSatisfies(format!(
            "u_L: max(psi_L, ||E_L M_L||) = {need_l:.3e} needs u_L <= {:.3e}",
            limit / need_l
        ))
    })?;
    rationale.push(format!(
        "u_L = {}: u_L*psi_L = {:.3e}, u_L*||E_L M_L|| = {:.3e}, both <= {:.3e}",
        u_l.name(),
        u_l.unit_roundoff() * m.psi_l,
        u_l.unit_roundoff() * m.norm_el_ml,
        limit
    ));

    let ratio = if m.norm_er == 0.0 { 0.0 } else { m.norm_er / m.norm_mr_inv };
    let u_r = loosest(|f| ratio < 1.0 / f.unit_roundoff()).ok_or_else(|| {
        Error::NoFormatSatisfies(format!("u_R: ||E_R||/||M_R^-1|| = {ratio:.3e} exceeds every u_R^-1"))
    })?;
    rationale.push(format!(
        "u_R = {}: ||E_R||/||M_R^-1|| = {:.3e} < u_R^-1 = {:.3e}",
        u_r.name(),
        ratio,
        1.0 / u_r.unit_roundoff()
    ));
    rationale.push(format!("u = {} (target)", target.name()));

    Ok(Recommendation { config: PrecisionConfig { u: target, u_a, u_l, u_r }, rationale })
}
