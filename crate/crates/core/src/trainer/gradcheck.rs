use alloc::vec::Vec;

use rand::seq::index;

use super::loss::{loss_and_full_grads, surrogate_loss, LossConfig};
use super::model::EmbeddingModel;
use crate::episodes::Episode;
use crate::error::{bail, Result};
use crate::rng::stream_rng;

/// Above this many coordinates a seeded random subset is checked.
pub const MAX_CHECKED: usize = 10_000;

/// Denominator floor of the relative error. Coordinates whose gradient is
/// exactly zero (e.g. output biases under the translation-invariant center
/// term) still pick up central-difference roundoff of order
/// `eps * |L| / step`, about 1e-12 at step 1e-5; below the floor the
/// comparison is absolute.
pub const REL_FLOOR: f64 = 1e-5;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

#[derive(Debug, Clone, Copy)]
enum Coord {
    Param(usize),
    Support(usize),
    Query(usize),
}

/// Largest relative error between analytic gradients and central differences
/// `(L(x + h) - L(x - h)) / 2h`, over all model parameters and all input
/// features of the episode.
pub fn grad_check(model: &EmbeddingModel, episode: &Episode, cfg: &LossConfig, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        bail!(Argument, "finite-difference step must be > 0, got {step}");
    }
    let (_, grads) = loss_and_full_grads(model, episode, cfg)?;
    let mut coords: Vec<Coord> = (0..model.param_count()).map(Coord::Param).collect();
    coords.extend((0..episode.support_x.as_slice().len()).map(Coord::Support));
    coords.extend((0..episode.query_x.as_slice().len()).map(Coord::Query));
    if coords.len() > MAX_CHECKED {
        let mut rng = stream_rng(episode.seed, 0x67c);
        let mut keep = index::sample(&mut rng, coords.len(), MAX_CHECKED).into_vec();
        keep.sort_unstable();
        coords = keep.into_iter().map(|i| coords[i]).collect();
    }

    let mut model = model.clone();
    let mut ep = episode.clone();
    let mut worst: f64 = 0.0;
    for c in coords {
        let analytic = match c {
            Coord::Param(i) => grads.params[i],
            Coord::Support(i) => grads.support_x.as_slice()[i],
            Coord::Query(i) => grads.query_x.as_slice()[i],
        };
        let orig = *slot(&mut model, &mut ep, c);
        *slot(&mut model, &mut ep, c) = orig + step;
        let plus = surrogate_loss(&model, &ep, cfg)?.total;
        *slot(&mut model, &mut ep, c) = orig - step;
        let minus = surrogate_loss(&model, &ep, cfg)?.total;
        *slot(&mut model, &mut ep, c) = orig;
        worst = worst.max(relative_error(analytic, (plus - minus) / (2.0 * step)));
    }
    Ok(worst)
}

fn slot<'a>(model: &'a mut EmbeddingModel, ep: &'a mut Episode, c: Coord) -> &'a mut f64 {
    match c {
        Coord::Param(i) => &mut model.params_mut()[i],
        Coord::Support(i) => &mut ep.support_x.as_mut_slice()[i],
        Coord::Query(i) => &mut ep.query_x.as_mut_slice()[i],
    }
}
