/// A budget that can be polled for expiry.
///
/// The core crate has no clock; callers supply one.
pub trait Deadline: Sync {
    fn expired(&self) -> bool;
}

/// Never expires.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unlimited;

impl Deadline for Unlimited {
    fn expired(&self) -> bool {
        false
    }
}

impl<F: Fn() -> bool + Sync> Deadline for F {
    fn expired(&self) -> bool {
        self()
    }
}
