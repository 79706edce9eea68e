//! One-time-pad index arithmetic and the bin-index splits.
//!
//! All indices are 1-based to mirror the `[1:N]` index sets of the scheme;
//! the modular arithmetic shifts to 0-based internally.

/// c = (b + k - 2) mod n_k + 1.
pub fn otp_add(b: u64, k: u64, n_k: u64) -> u64 {
    debug_assert!(b >= 1 && b <= n_k && k >= 1 && k <= n_k);
    ((b - 1) + (k - 1)) % n_k + 1
}

/// Inverse of [`otp_add`] in its first argument.
pub fn otp_sub(c: u64, k: u64, n_k: u64) -> u64 {
    debug_assert!(c >= 1 && c <= n_k && k >= 1);
    ((c - 1) + n_k - ((k - 1) % n_k)) % n_k + 1
}

/// Pack the Phase-2 randomization index and the secret-key symbol into one
/// pad value in [1..n_k1 * n_k2].
pub fn combine_key(l22: u64, k2: u64, n_k2: u64) -> u64 {
    (l22 - 1) * n_k2 + (k2 - 1) + 1
}

/// Split a w-bin index into (encrypted part, clear remainder):
/// b1 in [1..n_k] is the low digit, b2 the high one.
pub fn split_w_bin(b: u64, n_k: u64) -> (u64, u64) {
    ((b - 1) % n_k + 1, (b - 1) / n_k + 1)
}

/// Inverse of [`split_w_bin`].
pub fn join_w_bin(b1: u64, b2: u64, n_k: u64) -> u64 {
    (b2 - 1) * n_k + (b1 - 1) + 1
}
