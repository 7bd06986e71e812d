//! Small fixed-size vector helpers. Points are always stored with three
//! components; in 2D the third one is zero.

pub type Point = [f64; 3];

#[inline]
pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn axpy(y: &mut Point, s: f64, x: &Point) {
    y[0] += s * x[0];
    y[1] += s * x[1];
    y[2] += s * x[2];
}

pub fn centroid(points: &[Point]) -> Point {
    let mut c = [0.0; 3];
    for p in points {
        axpy(&mut c, 1.0, p);
    }
    scale(&c, 1.0 / points.len() as f64)
}

/// Euclidean norm of a plain slice.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}
