/// Hooks the solver polls while it runs.
///
/// The core crate has no clock. Callers that want wall-clock statistics or a
/// deadline supply a monitor; the default methods make it a no-op.
pub trait Monitor {
    /// Monotonic timestamp in nanoseconds. Only differences are used.
    fn now_ns(&self) -> u64 {
        0
    }

    /// Polled periodically; returning `true` aborts with a budget outcome.
    fn should_stop(&self) -> bool {
        false
    }
}

/// A monitor that never stops and reports zero elapsed time.
#[derive(Debug, Default, Clone, Copy)]
pub struct Unmonitored;

impl Monitor for Unmonitored {}

impl<M: Monitor + ?Sized> Monitor for &M {
    fn now_ns(&self) -> u64 {
        (**self).now_ns()
    }

    fn should_stop(&self) -> bool {
        (**self).should_stop()
    }
}
