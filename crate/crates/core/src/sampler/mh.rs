//! Coordinate-wise random-walk Metropolis-Hastings kernel.

use rand::Rng;
use rand_distr::StandardNormal;

/// Proposal mechanism for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordKind {
    /// Plain Gaussian random walk.
    Unbounded,
    /// Gaussian walk on ln(x), keeping x > 0. The acceptance ratio carries
    /// the Jacobian factor x'/x.
    LogPositive,
    /// Gaussian step reflected at 0 and 1. Reflection is measure-preserving,
    /// so the proposal stays symmetric and needs no correction.
    UnitReflect,
}

/// One coordinate of the walk: its proposal mechanism and step scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coord {
    pub kind: CoordKind,
    pub scale: f64,
}

impl Coord {
    pub fn new(kind: CoordKind, scale: f64) -> Self {
        Self { kind, scale }
    }
}

/// One Metropolis-Hastings sweep over `state`: each coordinate is proposed
/// and accepted or rejected in turn against `log_target` evaluated on the
/// full state. Returns one acceptance flag per coordinate.
///
/// `log_target` must be finite at the entry state.
pub fn mh_step<R: Rng + ?Sized>(
    state: &mut [f64],
    coords: &[Coord],
    mut log_target: impl FnMut(&[f64]) -> f64,
    rng: &mut R,
) -> Vec<bool> {
    assert_eq!(state.len(), coords.len());
    let mut flags = Vec::with_capacity(coords.len());
    let mut lt_cur = log_target(state);
    debug_assert!(lt_cur.is_finite(), "log target must be finite at the current state");
    for (i, coord) in coords.iter().enumerate() {
        if coord.scale == 0.0 {
            // Zero displacement proposes the state itself.
            flags.push(true);
            continue;
        }
        let current = state[i];
        let z: f64 = rng.sample(StandardNormal);
        let (proposal, log_jacobian) = match coord.kind {
            CoordKind::Unbounded => (current + coord.scale * z, 0.0),
            CoordKind::LogPositive => {
                let ln_prop = current.ln() + coord.scale * z;
                (ln_prop.exp(), ln_prop - current.ln())
            }
            CoordKind::UnitReflect => (reflect_unit(current + coord.scale * z), 0.0),
        };
        state[i] = proposal;
        let lt_prop = log_target(state);
        if decide(&mut lt_cur, lt_prop, log_jacobian, rng) {
            flags.push(true);
        } else {
            state[i] = current;
            flags.push(false);
        }
    }
    flags
}

/// Shared Metropolis decision. Updates `lt_cur` on acceptance. Impossible
/// proposals are always rejected; an impossible current state is always
/// escaped.
pub(crate) fn decide<R: Rng + ?Sized>(
    lt_cur: &mut f64,
    lt_prop: f64,
    log_jacobian: f64,
    rng: &mut R,
) -> bool {
    if lt_prop.is_nan() || lt_prop == f64::NEG_INFINITY {
        return false;
    }
    let accept = if *lt_cur == f64::NEG_INFINITY {
        true
    } else {
        let log_ratio = lt_prop - *lt_cur + log_jacobian;
        log_ratio >= 0.0 || rng.gen::<f64>().ln() < log_ratio
    };
    if accept {
        *lt_cur = lt_prop;
    }
    accept
}

/// Folds x into [0, 1] by reflecting at both ends.
pub(crate) fn reflect_unit(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r > 1.0 {
        2.0 - r
    } else {
        r
    }
}
