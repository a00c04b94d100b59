use crate::rng::uniform_on_sphere;
use crate::sphere::UnitPoint;
use rand::Rng;

/// `n` independent uniform points on S^d.
pub fn sample_iid<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Vec<UnitPoint> {
    (0..n).map(|_| uniform_on_sphere(d, rng)).collect()
}
