//! Sample a Gaussian mixture, inspect it, and round-trip it through CSV.

use rpcc::dataset::{generate_mixture, load_csv, save_csv, MixtureSpec};

fn main() {
    // 120 points in R^50 from 4 spherical components at basis-vector means.
    let spec = MixtureSpec::balanced_basis(50, 4, 0.01, 120, 42);
    let (data, truth) = generate_mixture(&spec).unwrap();
    println!("sampled {} points in {} dimensions", data.n(), data.d());
    println!("cluster sizes: {:?}", truth.sizes());

    // Within-cluster squared distances concentrate near 2 d sigma^2.
    let members = truth.cluster_indices();
    let mut total = 0.0;
    let mut count = 0usize;
    for cluster in &members {
        for (a, &i) in cluster.iter().enumerate() {
            for &j in &cluster[(a + 1)..] {
                total += data.sq_dist(i, j);
                count += 1;
            }
        }
    }
    println!(
        "mean within-cluster squared distance: {:.4} (2 d sigma^2 = {:.4})",
        total / count as f64,
        2.0 * 50.0 * 0.01
    );

    let dir = std::env::temp_dir().join("rpcc_example_mixture");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mixture.csv");
    save_csv(&data, Some(&truth), &path).unwrap();
    let (back, labels) = load_csv(&path, true).unwrap();
    assert_eq!(back.values(), data.values());
    assert_eq!(labels.unwrap().labels(), truth.labels());
    println!("CSV round trip exact: {}", path.display());
}
