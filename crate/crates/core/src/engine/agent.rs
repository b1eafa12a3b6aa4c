use crate::error::ConfigError;
use crate::language::{LanguageMap, Role};
use crate::metrics::C_MIN;
use crate::types::{AgentId, Coins, Inventory};
use rand::Rng;
use rand_distr::{Distribution, Pareto};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    pub inventory: Inventory,
    /// Accumulated effort.
    pub labor: f64,
    pub build_skill_alone: Coins,
    pub build_skill_together: Coins,
    pub gather_skill: f64,
    pub language: LanguageMap,
    pub role: Role,
}

/// Build skills: alone-skill from a Pareto(`min`, `shape`) clipped to
/// `[min, max]`, together-skill `multiplier ×` that, clipped at `cap`.
pub fn sample_build_skills<R: Rng + ?Sized>(
    rng: &mut R,
    min: f64,
    max: f64,
    shape: f64,
    multiplier: f64,
    cap: f64,
) -> (Coins, Coins) {
    let pareto = Pareto::new(min, shape).expect("validated Pareto parameters");
    let alone = pareto.sample(rng).clamp(min, max);
    let together = (alone * multiplier).min(cap);
    (Coins::from_f64(alone), Coins::from_f64(together))
}

/// Isoelastic utility of coin minus labor: `(C^(1−η) − 1)/(1−η) − L`.
///
/// With `η > 1` a zero endowment is clamped to [`C_MIN`].
pub fn utility(coin: f64, labor: f64, eta: f64) -> Result<f64, ConfigError> {
    if !(eta > 0.0) || eta == 1.0 {
        return Err(ConfigError::new(format!("eta: {eta} must be positive and not 1")));
    }
    let c = if eta > 1.0 { coin.max(C_MIN) } else { coin.max(0.0) };
    Ok((c.powf(1.0 - eta) - 1.0) / (1.0 - eta) - labor)
}

/// Marginal-utility reward `u_t − u_{t−1}`.
pub fn agent_reward(u_now: f64, u_prev: f64) -> f64 {
    u_now - u_prev
}

/// Planner reward `swf_t − swf_{t−1}`.
pub fn planner_reward(swf_now: f64, swf_prev: f64) -> f64 {
    swf_now - swf_prev
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn utility_examples() {
        for eta in [0.1, 0.5, 2.0, 3.5] {
            assert!((utility(1.0, 0.7, eta).unwrap() + 0.7).abs() < 1e-12);
        }
        assert_eq!(utility(4.0, 0.0, 0.5).unwrap(), 2.0);
        assert!(utility(4.0, 0.0, 1.0).is_err());
        assert!(utility(4.0, 0.0, 0.0).is_err());
        assert!(utility(0.0, 0.0, 2.0).unwrap().is_finite());
    }

    #[test]
    fn rewards_are_differences() {
        assert_eq!(agent_reward(3.0, 3.0), 0.0);
        assert_eq!(agent_reward(5.0, 2.0), 3.0);
        assert_eq!(planner_reward(1.5, 1.5), 0.0);
        assert_eq!(planner_reward(5.0, 2.0), 3.0);
    }

    #[test]
    fn skills_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (a, t) = sample_build_skills(&mut rng, 10.0, 30.0, 1.16, 1.5, 45.0);
            assert!(a >= Coins::whole(10) && a <= Coins::whole(30));
            assert!(t > a && t <= Coins::whole(45));
        }
    }

    proptest! {
        #[test]
        fn utility_monotone(c in 0.01f64..500.0, l in 0.0f64..100.0, eta in prop::sample::select(vec![0.2, 0.5, 0.8, 1.5, 3.0]), h in 1e-4f64..1.0) {
            let u = utility(c, l, eta).unwrap();
            prop_assert!(utility(c + h, l, eta).unwrap() > u);
            prop_assert!(utility(c, l + h, eta).unwrap() < u);
        }
    }
}
