use super::{ProblemInstance, SplitMix64};

/// Random PHEV-style instance.
///
/// Draw order, fixed for reproducibility: for each stage `k` in turn,
/// `d[k] ~ U[-1,1]`, `alpha2[k] ~ U[0,0.1]`, `alpha1[k] ~ U[0,1]`,
/// `beta2[k] ~ U[0,0.1]`, `beta1[k] ~ U[0,1]`; then `x0 ~ U[-0.5,0.5]`.
/// Constant terms are zero, `u` lies in `[-0.5, 0.5]`, `x` in `[-2, 2]`,
/// dynamics are the identity and there is no state cost.
///
/// # Panics
///
/// If `n == 0`.
pub fn generate_random_instance(seed: u64, n: usize) -> ProblemInstance {
    assert!(n >= 1, "horizon must be at least 1");
    let mut rng = SplitMix64::new(seed);
    let mut inst = ProblemInstance::zeros(n, (-0.5, 0.5), (-2.0, 2.0));
    for k in 0..n {
        inst.d[k] = rng.uniform(-1.0, 1.0);
        inst.alpha2[k] = rng.uniform(0.0, 0.1);
        inst.alpha1[k] = rng.uniform(0.0, 1.0);
        inst.beta2[k] = rng.uniform(0.0, 0.1);
        inst.beta1[k] = rng.uniform(0.0, 1.0);
    }
    inst.x0 = rng.uniform(-0.5, 0.5);
    inst
}
