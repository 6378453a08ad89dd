use crate::precision::PrecisionConfig;

/// Constants of the error analysis. Only `c0` has a closed form; the
/// others default to one and can be overridden for sensitivity studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConstants {
    pub c: f64,
    pub c13: f64,
}

impl Default for AnalysisConstants {
    fn default() -> Self {
        AnalysisConstants { c: 1.0, c13: 1.0 }
    }
}

impl AnalysisConstants {
    pub fn c0(&self, n: usize) -> f64 {
        crate::fgmres::c0(n)
    }

    /// `1.3 c / (1 - rho)`, infinite once `rho >= 1`.
    pub fn amplification(&self, rho: f64) -> f64 {
        if rho < 1.0 {
            1.3 * self.c / (1.0 - rho)
        } else {
            f64::INFINITY
        }
    }
}

/// `1.3 c13 ||M_R|| (u ||Z_k|| + u_R ||E_R||)`.
pub fn rho(norm_mr: f64, norm_z: f64, norm_er: f64, cfg: &PrecisionConfig, consts: &AnalysisConstants) -> f64 {
    1.3 * consts.c13 * norm_mr * (cfg.u.unit_roundoff() * norm_z + cfg.u_r.unit_roundoff() * norm_er)
}

/// Norms entering the backward error bound.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZetaInputs {
    pub norm_b_tilde: f64,
    pub norm_a_tilde: f64,
    pub norm_z: f64,
    pub norm_mr_dx: f64,
    pub norm_x0: f64,
    pub norm_x: f64,
    pub norm_el_ml: f64,
    pub psi_a: f64,
    pub psi_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaTerms {
    pub zeta1: f64,
    pub zeta2: f64,
    pub zeta: f64,
}

pub fn zeta_terms(inp: &ZetaInputs, cfg: &PrecisionConfig) -> ZetaTerms {
    let (u, ua, ul) = (cfg.u.unit_roundoff(), cfg.u_a.unit_roundoff(), cfg.u_l.unit_roundoff());
    let zeta1 = (u + ul * inp.norm_el_ml) * inp.norm_b_tilde;
    let zeta2 = (u + ua * inp.psi_a + ul * inp.psi_l) * inp.norm_a_tilde * (inp.norm_z * inp.norm_mr_dx + inp.norm_x0);
    let zeta = (zeta1 + zeta2) / (inp.norm_b_tilde + inp.norm_a_tilde * inp.norm_x);
    ZetaTerms { zeta1, zeta2, zeta }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub bound: f64,
    pub measured: f64,
}

impl BoundCheck {
    pub fn satisfied(&self) -> bool {
        self.measured <= self.bound
    }
}

/// Inputs for [`bound_suite`]; every field is a computed quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub rho: f64,
    pub zeta: ZetaTerms,
    pub residual_leftprec: f64,
    pub be_leftprec: f64,
    pub be_original: f64,
    pub forward_error: f64,
    pub kappa_ml: f64,
    pub kappa_a_tilde: f64,
    pub kappa_a_hat: f64,
    pub kappa_mr: f64,
    pub psi_a: f64,
    pub psi_l: f64,
    pub psi_a_bound: f64,
    pub psi_l_bound: f64,
}

/// Evaluates the residual, backward and forward error bounds next to the
/// measured values.
pub fn bound_suite(inp: &BoundInputs, consts: &AnalysisConstants) -> Vec<BoundCheck> {
    let amp = consts.amplification(inp.rho);
    let z = inp.zeta;
    vec![
        BoundCheck { name: "residual", bound: amp * (z.zeta1 + z.zeta2), measured: inp.residual_leftprec },
        BoundCheck { name: "backward_leftprec", bound: amp * z.zeta, measured: inp.be_leftprec },
        BoundCheck {
            name: "backward_original",
            bound: amp * z.zeta * inp.kappa_ml.min(inp.kappa_a_tilde),
            measured: inp.be_original,
        },
        BoundCheck { name: "forward_left", bound: amp * z.zeta * inp.kappa_a_tilde, measured: inp.forward_error },
        BoundCheck {
            name: "forward_split",
            bound: amp * z.zeta * inp.kappa_a_hat * inp.kappa_mr,
            measured: inp.forward_error,
        },
        BoundCheck { name: "psi_a", bound: inp.psi_a_bound, measured: inp.psi_a },
        BoundCheck { name: "psi_l", bound: inp.psi_l_bound, measured: inp.psi_l },
    ]
}
