use std::fmt;
use std::str::FromStr;

use crate::problems::{BoundaryFluxKind, EntropyFluxKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseScheme {
    #[default]
    Galerkin,
    Supg,
    GalerkinJump,
    /// Galerkin in a discontinuous space with LLF interface fluxes.
    Dg,
    Rusanov,
    LimitedRd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyFilter {
    #[default]
    None,
    Jump,
    Streamline,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub base: BaseScheme,
    pub theta_jump: f64,
    pub theta_stream: f64,
    pub supg_theta: f64,
    pub entropy_correction: bool,
    pub entropy_filter: EntropyFilter,
    pub filter_theta: f64,
    pub epsilon: f64,
    pub entropy_flux: EntropyFluxKind,
    /// Overrides the problem's boundary flux when set.
    pub boundary_flux: Option<BoundaryFluxKind>,
    /// Use the 3-point midpoint rule for filter volume integrals.
    pub reduced_filter_quadrature: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            base: BaseScheme::Galerkin,
            theta_jump: 0.0,
            theta_stream: 0.0,
            supg_theta: 1.0,
            entropy_correction: false,
            entropy_filter: EntropyFilter::None,
            filter_theta: 0.0,
            epsilon: 1e-20,
            entropy_flux: EntropyFluxKind::Potential,
            boundary_flux: None,
            reduced_filter_quadrature: false,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("theta_jump", self.theta_jump),
            ("theta_stream", self.theta_stream),
            ("supg_theta", self.supg_theta),
            ("filter_theta", self.filter_theta),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        Ok(())
    }

    /// Whether the scheme needs gradient jumps across faces.
    pub fn uses_jumps(&self) -> bool {
        matches!(self.base, BaseScheme::GalerkinJump)
            || (self.base == BaseScheme::LimitedRd && self.theta_jump > 0.0)
            || self.entropy_filter == EntropyFilter::Jump
    }
}

macro_rules! named_enum {
    ($t:ty, $what:literal, $( $v:path => $s:literal ),+ $(,)?) => {
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $( $s => Ok($v), )+
                    _ => Err(Error::invalid(format!(
                        concat!("unknown ", $what, " `{}` (expected one of: {})"),
                        s,
                        [$( $s ),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $( $v => $s, )+ })
            }
        }
    };
}

named_enum!(BaseScheme, "scheme",
    BaseScheme::Galerkin => "galerkin",
    BaseScheme::Supg => "supg",
    BaseScheme::GalerkinJump => "galerkin_jump",
    BaseScheme::Dg => "dg",
    BaseScheme::Rusanov => "rusanov",
    BaseScheme::LimitedRd => "limited_rd",
);

named_enum!(EntropyFilter, "entropy filter",
    EntropyFilter::None => "none",
    EntropyFilter::Jump => "jump",
    EntropyFilter::Streamline => "streamline",
);

named_enum!(EntropyFluxKind, "entropy flux",
    EntropyFluxKind::Potential => "potential",
    EntropyFluxKind::Llf => "llf_entropy",
);

named_enum!(BoundaryFluxKind, "boundary flux",
    BoundaryFluxKind::Llf => "llf",
    BoundaryFluxKind::Upwind => "upwind",
);
