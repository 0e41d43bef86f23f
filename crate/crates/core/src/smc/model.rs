use crate::rng::StreamRng;

/// A sequence of targets `p_0, …, p_T` together with the proposal `η` used to
/// extend paths one state at a time.
///
/// Log increments are natural logs of
/// `p_t(x_{0:t}) / (p_{t-1}(x_{0:t-1}) · η(x_t | x_{0:t-1}))`; `-inf` is a
/// legal value and marks a zero-weight path. Implementations must be
/// deterministic in their arguments and must never return NaN.
pub trait SequentialModel: Sync {
    type State: Clone + Send + Sync;

    /// Index `T` of the last state; a full path has `T + 1` states.
    fn horizon(&self) -> usize;

    fn initial_propose(&self, rng: &mut StreamRng) -> Self::State;

    /// `ln p_0(x_0) / η(x_0)`.
    fn initial_log_increment(&self, x0: &Self::State) -> f64;

    /// Draw `x_t ~ η(· | prefix)` where `prefix = x_{0:t-1}` is non-empty.
    fn propose(&self, prefix: &[Self::State], rng: &mut StreamRng) -> Self::State;

    fn log_increment(&self, prefix: &[Self::State], x: &Self::State) -> f64;

    /// Proposal followed by its increment, dispatching on the prefix length.
    fn extend(&self, prefix: &[Self::State], rng: &mut StreamRng) -> (Self::State, f64) {
        if prefix.is_empty() {
            let x = self.initial_propose(rng);
            let lw = self.initial_log_increment(&x);
            (x, lw)
        } else {
            let x = self.propose(prefix, rng);
            let lw = self.log_increment(prefix, &x);
            (x, lw)
        }
    }
}
