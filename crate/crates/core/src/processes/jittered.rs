use crate::partition::ZonalPartition;
use crate::sphere::UnitPoint;
use rand::Rng;

/// One uniform point in every cell; point `i` lies in cell `i`.
pub fn sample_jittered<R: Rng + ?Sized>(partition: &ZonalPartition, rng: &mut R) -> Vec<UnitPoint> {
    (0..partition.n_cells()).map(|i| partition.sample_in_cell(i, rng)).collect()
}
