use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not special unitary: ‖U†U − I‖ = {unitarity:.3e}, |det U − 1| = {det:.3e}")]
    NotSpecialUnitary { unitarity: f64, det: f64 },

    #[error("weight vector {0:?} is not in the alcove")]
    NotInAlcove(Vec<f64>),

    #[error("torsion shift needs at least two blocks when k = 1")]
    PatternTooCoarse,

    #[error("path passes within {distance:.3e} of a pole of the connection")]
    PathTooCloseToSingularity { distance: f64 },

    #[error("residue loop encloses both pole divisors")]
    LoopEnclosesBothDivisors,

    #[error("solver did not converge after {starts} starts (best residual {best_residual:.3e})")]
    NoConvergence { starts: usize, best_residual: f64 },

    #[error("numerical rank is ambiguous: {0}")]
    RankAmbiguous(String),

    #[error("illegal symmetry: {0}")]
    IllegalSymmetry(String),

    #[error("framing forms are not nested at steps {0} and {1}")]
    NotNested(usize, usize),

    #[error("no compatibility quotient between steps {0} and {1}")]
    Incompatible(usize, usize),

    #[error("illegal vanishing pattern: {0}")]
    IllegalPattern(String),

    #[error("strata at the two points are not related by reversal")]
    AsymmetricStrata,

    #[error("torsion generators are degenerate: |β(s₁,…,s_t)| = {0:.3e}")]
    DegenerateTorsion(f64),
}

impl Error {
    /// Failures that come from the numerics rather than from malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::RankAmbiguous(_)
                | Error::PathTooCloseToSingularity { .. }
                | Error::DegenerateTorsion(_)
        )
    }
}
