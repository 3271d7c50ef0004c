//! Small 2D vector/matrix helpers used throughout the crate.

/// 2-vector operations on `[f64; 2]`.
pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn scale(s: f64, a: [f64; 2]) -> [f64; 2] {
    [s * a[0], s * a[1]]
}

pub fn norm(a: [f64; 2]) -> f64 {
    dot(a, a).sqrt()
}

/// Rotate by +90 degrees: `(x, y) -> (-y, x)`.
pub fn rot_ccw(a: [f64; 2]) -> [f64; 2] {
    [-a[1], a[0]]
}

/// Rotate by -90 degrees: `(x, y) -> (y, -x)`.
pub fn rot_cw(a: [f64; 2]) -> [f64; 2] {
    [a[1], -a[0]]
}

/// Cross product z-component of two plane vectors.
pub fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Symmetric 2x2 matrix stored as `[[a11, a12], [a12, a22]]` row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 {
            m: [[a11, a12], [a21, a22]],
        }
    }

    pub fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn scalar(a: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, a)
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.m[0][1] - self.m[1][0]).abs() <= tol * (1.0 + self.norm_inf())
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.m[0][1].abs() <= tol * (1.0 + self.norm_inf())
            && self.m[1][0].abs() <= tol * (1.0 + self.norm_inf())
    }

    pub fn norm_inf(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn inverse(&self) -> Mat2 {
        let d = self.det();
        Mat2::new(
            self.m[1][1] / d,
            -self.m[0][1] / d,
            -self.m[1][0] / d,
            self.m[0][0] / d,
        )
    }

    /// Eigenvalues of a symmetric 2x2 matrix, ascending.
    pub fn sym_eigenvalues(&self) -> [f64; 2] {
        let half_tr = 0.5 * self.trace();
        let disc = (0.25 * (self.m[0][0] - self.m[1][1]).powi(2)
            + self.m[0][1] * self.m[1][0])
            .max(0.0)
            .sqrt();
        [half_tr - disc, half_tr + disc]
    }

    /// Symmetric positive definite square root.
    ///
    /// Uses the closed form `sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A))`.
    pub fn spd_sqrt(&self) -> Mat2 {
        let s = self.det().max(0.0).sqrt();
        let t = (self.trace() + 2.0 * s).sqrt();
        Mat2::new(
            (self.m[0][0] + s) / t,
            self.m[0][1] / t,
            self.m[1][0] / t,
            (self.m[1][1] + s) / t,
        )
    }
}
