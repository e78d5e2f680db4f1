use crate::scalar::Real;

/// Upper bound of `|h_n(xi)|` over all `n` and `xi` for the normalized
/// Hermite functions (Cramér's inequality), in units of `pi^{-1/4}`.
pub(crate) const CRAMER_BOUND: f64 = 1.086_435;

/// Normalized Hermite functions `h_{n}(xi)` and `h_{n-1}(xi)`.
///
/// Uses the three-term recurrence on the normalized functions, which stays
/// finite for large `n` where the raw polynomials overflow.
pub(crate) fn hermite_pair<T: Real>(n: usize, xi: T) -> (T, T) {
    let h0 = T::PI().powf(T::lit(-0.25)) * (-xi * xi / T::lit(2.0)).exp();
    if n == 0 {
        return (h0, T::zero());
    }
    let mut prev = h0;
    let mut cur = T::lit(2.0).sqrt() * xi * h0;
    for k in 1..n {
        let kf = T::count(k);
        let next = (T::lit(2.0) / (kf + T::one())).sqrt() * xi * cur - (kf / (kf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `(h_n, h_n', h_n'')` with respect to `xi`.
pub(crate) fn hermite_jet<T: Real>(n: usize, xi: T) -> (T, T, T) {
    let (h, hm1) = hermite_pair(n, xi);
    let nf = T::count(n);
    let d1 = -xi * h + (T::lit(2.0) * nf).sqrt() * hm1;
    let d2 = (xi * xi - T::lit(2.0) * nf - T::one()) * h;
    (h, d1, d2)
}
