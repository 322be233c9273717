use predfl::seed::rng_from;
use predfl::Location;
use rand::Rng;

/// `n` points uniform on `[0, extent]^2`.
pub fn synth_uniform(n: usize, extent: f64, seed: u64) -> Vec<Location> {
    let mut rng = rng_from(seed);
    (0..n)
        .map(|_| Location::Point(vec![rng.random_range(0.0..=extent), rng.random_range(0.0..=extent)]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        let pts = synth_uniform(2000, 1e6, 1);
        assert_eq!(pts.len(), 2000);
        for p in &pts {
            let c = p.coords().unwrap();
            assert_eq!(c.len(), 2);
            assert!(c.iter().all(|&v| (0.0..=1e6).contains(&v)));
        }
        assert_eq!(pts, synth_uniform(2000, 1e6, 1));
        assert_ne!(pts, synth_uniform(2000, 1e6, 2));
        assert_eq!(synth_uniform(1, 1e6, 0).len(), 1);
    }
}
