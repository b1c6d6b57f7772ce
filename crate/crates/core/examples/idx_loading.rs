//! Reads IDX image and label files (MNIST layout) and classifies a few
//! images with 1-NN. Pass the two paths, or run without arguments to use a
//! tiny synthetic pair.

use probekit::ingest::{idx_dataset, load_idx_images, load_idx_labels};
use probekit::models::{Model, NearestNeighbor};
use probekit::split::subsample_train_split;

fn synthetic() -> std::io::Result<(std::path::PathBuf, std::path::PathBuf)> {
    let dir = std::env::temp_dir().join("probekit-idx-example");
    std::fs::create_dir_all(&dir)?;
    let n = 40u32;
    let mut images = vec![0, 0, 0x08, 3];
    for d in [n, 4, 4] {
        images.extend_from_slice(&d.to_be_bytes());
    }
    let mut labels = vec![0, 0, 0x08, 1];
    labels.extend_from_slice(&n.to_be_bytes());
    for i in 0..n {
        let class = (i % 2) as u8;
        // class 0 lights the top half, class 1 the bottom half
        images.extend((0..16).map(|p| if (p < 8) == (class == 0) { 200 + (i % 50) as u8 } else { (i % 30) as u8 }));
        labels.push(class);
    }
    let (ip, lp) = (dir.join("images-idx3-ubyte"), dir.join("labels-idx1-ubyte"));
    std::fs::write(&ip, images)?;
    std::fs::write(&lp, labels)?;
    Ok((ip, lp))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (ip, lp) = match args.as_slice() {
        [i, l] => (i.into(), l.into()),
        _ => synthetic()?,
    };
    let ds = idx_dataset(load_idx_images(&ip)?, load_idx_labels(&lp)?)?;
    println!("{} images, {} pixels, {} classes", ds.n_rows(), ds.n_features(), ds.n_classes());
    let test: Vec<usize> = (0..ds.n_rows().min(10)).collect();
    let split = subsample_train_split(&ds, (ds.n_rows() - test.len()).min(1000), &test, 0)?;
    let p = NearestNeighbor.predict(&ds.subset(&split.train_idx)?, &ds.subset(&split.test_idx)?.features().clone())?;
    let truth: Vec<usize> = test.iter().map(|&i| ds.labels()[i]).collect();
    println!("predicted {:?}\ntrue      {truth:?}", p.argmax_labels());
    Ok(())
}
