use super::{reno_increase, Window};

/// Plain TCP Reno: everything lives in the shared window.
#[derive(Clone, Copy, Debug, Default)]
pub struct RenoState;

impl RenoState {
    pub fn on_ack(&mut self, w: &mut Window) {
        reno_increase(w);
    }
}
