//! Scalar root bracketing for the pointwise nonlinearities.

/// Bisection on a bracket with `f(a)·f(b) < 0`, to machine resolution.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// All sign changes and exact zeros of `f` on a uniform grid of `cells`
/// cells over `[lo, hi]`, each refined by bisection. Roots closer than one
/// cell width to a previous one are dropped.
pub fn bracket_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let width = (hi - lo) / cells as f64;
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|last| (r - last).abs() > width * 0.5) {
            roots.push(r);
        }
    };
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=cells {
        let x1 = if i == cells { hi } else { lo + width * i as f64 };
        let f1 = f(x1);
        if f0 == 0.0 {
            push(x0, &mut roots);
        } else if f1 != 0.0 && (f0 < 0.0) != (f1 < 0.0) && f0.is_finite() && f1.is_finite() {
            push(bisect(&f, x0, x1), &mut roots);
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        push(x0, &mut roots);
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_roots() {
        let roots = bracket_roots(|x| (x - 1.0) * (x + 0.5) * (x - 2.25), -3.0, 3.0, 1000);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-0.5, 1.0, 2.25]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_grid_zero_counted_once() {
        let roots = bracket_roots(|x| x, -1.0, 1.0, 10);
        assert_eq!(roots, vec![0.0]);
    }

    #[test]
    fn no_roots() {
        assert!(bracket_roots(|x| x * x + 1.0, -5.0, 5.0, 100).is_empty());
    }
}
