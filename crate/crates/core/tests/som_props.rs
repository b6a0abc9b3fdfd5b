use maglap::rng::rng_from_seed;
use maglap::som::{label_neurons, purity, som_train, u_matrix, Fingerprint, SomConfig, SomGrid, SomMode};
use rand::Rng;

fn cluster(rng: &mut impl Rng, center: &[f64], spread: f64, count: usize, label: &str) -> Vec<Fingerprint> {
    (0..count)
        .map(|_| Fingerprint {
            values: center.iter().map(|c| c + spread * (rng.random::<f64>() - 0.5)).collect(),
            label: Some(label.to_string()),
        })
        .collect()
}

fn two_clusters(seed: u64) -> Vec<Fingerprint> {
    let mut rng = rng_from_seed(seed);
    let mut data = cluster(&mut rng, &[0.0; 6], 1.0, 30, "a");
    data.extend(cluster(&mut rng, &[20.0; 6], 1.0, 30, "b"));
    data
}

fn config(mode: SomMode) -> SomConfig {
    SomConfig { width: 8, height: 6, epochs: 30, seed: 3, mode, ..SomConfig::default() }
}

#[test]
fn separated_clusters_get_disjoint_units() {
    for mode in [SomMode::Online, SomMode::Batch] {
        let data = two_clusters(1);
        let mut som = som_train(&data, &config(mode)).unwrap();
        let units = |label: &str| -> std::collections::HashSet<usize> {
            data.iter().filter(|f| f.label.as_deref() == Some(label)).map(|f| som.bmu(&f.values)).collect()
        };
        assert!(units("a").is_disjoint(&units("b")), "{mode:?}");
        label_neurons(&mut som, &data).unwrap();
        assert_eq!(purity(&som, &data).unwrap(), 1.0);
    }
}

#[test]
fn bmu_is_translation_invariant() {
    let data = two_clusters(2);
    let som = som_train(&data, &config(SomMode::Online)).unwrap();
    let shift = 123.456;
    let moved = SomGrid {
        codebook: som.codebook.iter().map(|w| w.iter().map(|x| x + shift).collect()).collect(),
        ..som.clone()
    };
    for f in &data {
        let g: Vec<f64> = f.values.iter().map(|x| x + shift).collect();
        assert_eq!(som.bmu(&f.values), moved.bmu(&g));
    }
}

#[test]
fn quantization_error_decreases() {
    let mut rng = rng_from_seed(9);
    let mut data = Vec::new();
    for (k, label) in ["a", "b", "c", "d"].iter().enumerate() {
        data.extend(cluster(&mut rng, &[k as f64 * 3.0, (k % 2) as f64 * 5.0, 1.0], 2.0, 25, label));
    }
    for mode in [SomMode::Online, SomMode::Batch] {
        let som = som_train(&data, &SomConfig { epochs: 40, ..config(mode) }).unwrap();
        let qe = &som.quantization_errors;
        assert_eq!(qe.len(), 40);
        // Online updates with a large early learning rate jitter; only the
        // low-rate tail is expected to settle.
        let settled = if mode == SomMode::Batch { 0 } else { 20 };
        for w in qe[settled..].windows(2) {
            assert!(w[1] <= 1.05 * w[0], "{mode:?}: {qe:?}");
        }
        assert!(qe[39] < 0.5 * qe[0], "{mode:?}: {qe:?}");
    }
}

#[test]
fn batch_mode_is_execution_independent() {
    let data = two_clusters(4);
    let par = som_train(&data, &config(SomMode::Batch)).unwrap();
    let seq = som_train(
        &data,
        &SomConfig { execution: maglap::Execution::Sequential, ..config(SomMode::Batch) },
    )
    .unwrap();
    assert_eq!(par.codebook, seq.codebook);
}

#[test]
fn u_matrix_ridge_separates_clusters() {
    let data = two_clusters(5);
    let som = som_train(&data, &config(SomMode::Online)).unwrap();
    let u = u_matrix(&som);
    assert_eq!((u.len(), u[0].len()), (8, 6));
    let mut all: Vec<f64> = u.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    let median = all[all.len() / 2];
    // Boundary neurons are those with a 4-neighbor winning the other cluster's side.
    let side = |k: usize| som.codebook[k][0] > 10.0;
    let mut boundary_max: f64 = 0.0;
    for x in 0..8 {
        for y in 0..6 {
            let k = som.index(x, y);
            let neighbours = [(x + 1, y), (x, y + 1)];
            for (nx, ny) in neighbours {
                if nx < 8 && ny < 6 && side(k) != side(som.index(nx, ny)) {
                    boundary_max = boundary_max.max(u[x][y]).max(u[nx][ny]);
                }
            }
        }
    }
    assert!(boundary_max > 3.0 * median, "boundary {boundary_max}, median {median}");
}

#[test]
fn unanimous_data_labels_every_visited_neuron() {
    let mut rng = rng_from_seed(6);
    let data = cluster(&mut rng, &[1.0, 2.0], 3.0, 40, "only");
    let mut som = som_train(&data, &config(SomMode::Online)).unwrap();
    label_neurons(&mut som, &data).unwrap();
    let visited: std::collections::HashSet<usize> = data.iter().map(|f| som.bmu(&f.values)).collect();
    for (k, label) in som.labels.as_ref().unwrap().iter().enumerate() {
        assert_eq!(label, if visited.contains(&k) { "only" } else { "none" });
    }
}
