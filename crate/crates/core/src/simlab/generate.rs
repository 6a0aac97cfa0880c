//! Random e-value vectors for each dependence regime.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::scenario::{Scenario, ScenarioKind, TwoPoint};
use crate::error::{Error, Result};
use crate::evalues::{EValueVector, Regime};
use crate::logvalue::LogValue;

/// Stream for replication `r`: the ChaCha key comes from `seed` and the
/// stream id is `r`, so replications are independent of evaluation order.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

#[inline]
fn draw_two_point<R: Rng + ?Sized>(law: &TwoPoint, rng: &mut R) -> f64 {
    if rng.random::<f64>() < law.p {
        law.hi
    } else {
        law.lo
    }
}

fn finish(values: Vec<f64>, regime: Regime) -> EValueVector {
    let logs = values
        .into_iter()
        .map(|x| LogValue::from_value(x).expect("generators emit nonnegative values"))
        .collect();
    EValueVector::from_log_values(logs, regime).expect("n ≥ 1")
}

/// `n` independent draws from an iid family.
pub fn gen_iid<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<EValueVector> {
    let values = match &scenario.kind {
        ScenarioKind::IidTwoPoint(law) => {
            let law = TwoPoint::new(law.p, law.hi, law.lo)?;
            (0..scenario.n).map(|_| draw_two_point(&law, rng)).collect()
        }
        &ScenarioKind::IidLognormal { sigma, mean } => {
            let shift = -0.5 * sigma * sigma;
            (0..scenario.n)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    mean * (sigma * z + shift).exp()
                })
                .collect()
        }
        _ => return Err(Error::Scenario(format!("`{scenario}` is not an iid family"))),
    };
    Ok(finish(values, Regime::Independent))
}

/// Draws the common factor, then `n` conditionally independent entries.
pub fn gen_simultaneous_factor<R: Rng + ?Sized>(
    scenario: &Scenario,
    rng: &mut R,
) -> Result<EValueVector> {
    let ScenarioKind::SimultaneousFactor { states, .. } = &scenario.kind else {
        return Err(Error::Scenario(format!("`{scenario}` is not a factor scenario")));
    };
    if let Some(bad) = states.iter().find(|s| !s.law.is_valid_e_variable()) {
        return Err(Error::Scenario(format!(
            "conditional mean {} exceeds 1",
            bad.law.mean()
        )));
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut state = &states[states.len() - 1];
    for s in states {
        acc += s.weight;
        if u < acc {
            state = s;
            break;
        }
    }
    let values = (0..scenario.n)
        .map(|_| draw_two_point(&state.law, rng))
        .collect();
    Ok(finish(values, Regime::Simultaneous))
}

pub fn gen_sequential_adversarial<R: Rng + ?Sized>(rng: &mut R) -> EValueVector {
    let first = if rng.random::<bool>() { 2.0 } else { 0.0 };
    let second = if first == 2.0 {
        1.0
    } else if rng.random_range(0..8) == 0 {
        8.0
    } else {
        0.0
    };
    finish(vec![first, second], Regime::Sequential)
}

/// Dispatches on the scenario kind.
pub fn generate<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<EValueVector> {
    match scenario.kind {
        ScenarioKind::IidTwoPoint(_) | ScenarioKind::IidLognormal { .. } => gen_iid(scenario, rng),
        ScenarioKind::SimultaneousFactor { .. } => gen_simultaneous_factor(scenario, rng),
        ScenarioKind::SequentialAdversarial => Ok(gen_sequential_adversarial(rng)),
    }
}
