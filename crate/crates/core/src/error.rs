use crate::controllers::Violations;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: must satisfy {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("infeasible thresholds: violated {0}")]
    Infeasible(Violations),
    #[error("insufficient control authority: U = {u_max} must exceed D/K_m = {required}")]
    InsufficientAuthority { u_max: f64, required: f64 },
    #[error("filter discretization unstable: dt*omega_c = {product} (limit 0.5)")]
    UnstableFilter { product: f64 },
    #[error("numerical blow-up: non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("traces have mismatched timing")]
    MismatchedTiming,
    #[error("no feasible improving threshold pair on the evaluated grid")]
    NoImprovingPair,
}

pub(crate) fn require(
    ok: bool,
    name: &'static str,
    value: f64,
    requirement: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            requirement,
        })
    }
}
