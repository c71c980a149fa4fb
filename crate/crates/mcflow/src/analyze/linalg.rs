//! Small fixed-size vector helpers shared by the analyzer.

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale(a: &[f64; 3], c: f64) -> [f64; 3] {
    [a[0] * c, a[1] * c, a[2] * c]
}

pub(crate) fn normalize(a: &[f64; 3]) -> Option<[f64; 3]> {
    let n = norm(a);
    (n > 0.0).then(|| scale(a, 1.0 / n))
}

/// Orthonormal basis of the orthogonal complement of `n` within the leading
/// `dim` coordinates (dim - 1 vectors).
pub(crate) fn complement_basis(n: &[f64; 3], dim: usize) -> Vec<[f64; 3]> {
    let mut basis = Vec::with_capacity(dim - 1);
    // start from coordinate axes, Gram-Schmidt against n and earlier picks
    for axis in 0..dim {
        if basis.len() == dim - 1 {
            break;
        }
        let mut v = [0.0; 3];
        v[axis] = 1.0;
        let mut w = sub(&v, &scale(n, dot(&v, n)));
        for b in &basis {
            w = sub(&w, &scale(b, dot(&w, b)));
        }
        if let Some(unit) = normalize(&w) {
            if norm(&w) > 1e-8 {
                basis.push(unit);
            }
        }
    }
    basis
}

/// Gram-Schmidt a set of vectors in place, dropping near-dependent ones.
pub(crate) fn orthonormalize(vs: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = *v;
        for b in &out {
            w = sub(&w, &scale(b, dot(&w, b)));
        }
        if norm(&w) > 1e-10 {
            out.push(normalize(&w).unwrap());
        }
    }
    out
}
