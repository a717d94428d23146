//! MNIST (IDX) and CIFAR-10 (binary batch) readers, `/255` normalization and
//! synthetic low-rank matrices for tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::elm::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, DenseMatrix};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
pub const CIFAR_RECORD: usize = 1 + 3 * 32 * 32;
pub const NUM_CLASSES: usize = 10;

/// Raw 8-bit images, pixels stored image after image.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImageSet {
    pub count: usize,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub pixels: Vec<u8>,
    pub labels: Vec<u8>,
}

impl RawImageSet {
    pub fn image_len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let len = self.image_len();
        &self.pixels[i * len..(i + 1) * len]
    }
}

fn be_u32(bytes: &[u8], at: usize, what: &Path) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::TruncatedFile(format!("{}: header", what.display())))
}

pub fn load_mnist(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<RawImageSet> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let img = fs::read(ip)?;
    let lab = fs::read(lp)?;

    let magic = be_u32(&img, 0, ip)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let magic = be_u32(&lab, 0, lp)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic {
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(&img, 4, ip)? as usize;
    let height = be_u32(&img, 8, ip)? as usize;
    let width = be_u32(&img, 12, ip)? as usize;
    let labels_count = be_u32(&lab, 4, lp)? as usize;
    if count != labels_count {
        return Err(Error::CountMismatch {
            images: count,
            labels: labels_count,
        });
    }
    let need = 16 + count * height * width;
    if img.len() < need {
        return Err(Error::TruncatedFile(format!(
            "{}: {} bytes, need {need}",
            ip.display(),
            img.len()
        )));
    }
    if lab.len() < 8 + count {
        return Err(Error::TruncatedFile(format!(
            "{}: {} bytes, need {}",
            lp.display(),
            lab.len(),
            8 + count
        )));
    }
    Ok(RawImageSet {
        count,
        height,
        width,
        channels: 1,
        pixels: img[16..need].to_vec(),
        labels: lab[8..8 + count].to_vec(),
    })
}

/// Writes an IDX image/label pair; the inverse of [`load_mnist`].
pub fn write_mnist(set: &RawImageSet, images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<()> {
    let mut img = Vec::with_capacity(16 + set.pixels.len());
    for v in [IDX_IMAGES_MAGIC, set.count as u32, set.height as u32, set.width as u32] {
        img.extend_from_slice(&v.to_be_bytes());
    }
    img.extend_from_slice(&set.pixels);
    fs::File::create(images_path)?.write_all(&img)?;

    let mut lab = Vec::with_capacity(8 + set.labels.len());
    lab.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(set.count as u32).to_be_bytes());
    lab.extend_from_slice(&set.labels);
    fs::File::create(labels_path)?.write_all(&lab)?;
    Ok(())
}

/// Reads and concatenates CIFAR-10 binary batches (records of one label
/// byte followed by 3072 channel-planar pixel bytes).
pub fn load_cifar10<P: AsRef<Path>>(batch_paths: &[P]) -> Result<RawImageSet> {
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for path in batch_paths {
        let path = path.as_ref();
        let bytes = fs::read(path)?;
        if bytes.len() % CIFAR_RECORD != 0 {
            return Err(Error::TruncatedFile(format!(
                "{}: length {} is not a multiple of {CIFAR_RECORD}",
                path.display(),
                bytes.len()
            )));
        }
        for rec in bytes.chunks_exact(CIFAR_RECORD) {
            if rec[0] as usize >= NUM_CLASSES {
                return Err(Error::LabelOutOfRange {
                    label: rec[0] as usize,
                    classes: NUM_CLASSES,
                });
            }
            labels.push(rec[0]);
            pixels.extend_from_slice(&rec[1..]);
        }
    }
    Ok(RawImageSet {
        count: labels.len(),
        height: 32,
        width: 32,
        channels: 3,
        pixels,
        labels,
    })
}

pub fn write_cifar10(set: &RawImageSet, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::with_capacity(set.count * CIFAR_RECORD);
    for i in 0..set.count {
        out.push(set.labels[i]);
        out.extend_from_slice(set.image(i));
    }
    fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

/// Maps bytes to `[0, 1]` by `/255` and flattens each image.
pub fn normalize(raw: &RawImageSet) -> Dataset {
    let d = raw.image_len();
    let data: Vec<f64> = raw.pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    let inputs = DenseMatrix::from_raw(raw.count, d, data);
    let labels = raw.labels.iter().map(|&l| l as usize).collect();
    Dataset::new_unchecked(inputs, labels, NUM_CLASSES)
}

/// Train/test file locations of an MNIST directory.
#[derive(Debug, Clone)]
pub struct MnistFiles {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl MnistFiles {
    /// Accepts both `train-images-idx3-ubyte` and `train-images.idx3-ubyte`
    /// spellings, optionally under an `mnist/` subdirectory.
    pub fn locate(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        for base in [dir.to_path_buf(), dir.join("mnist"), dir.join("MNIST")] {
            let find = |stem: &str, kind: &str| -> Option<PathBuf> {
                [format!("{stem}-{kind}-ubyte"), format!("{stem}.{kind}-ubyte")]
                    .into_iter()
                    .map(|n| base.join(n))
                    .find(|p| p.is_file())
            };
            if let (Some(a), Some(b), Some(c), Some(d)) = (
                find("train-images", "idx3"),
                find("train-labels", "idx1"),
                find("t10k-images", "idx3"),
                find("t10k-labels", "idx1"),
            ) {
                return Ok(Self {
                    train_images: a,
                    train_labels: b,
                    test_images: c,
                    test_labels: d,
                });
            }
        }
        Err(Error::DatasetMissing(dir.to_path_buf()))
    }

    pub fn load(&self) -> Result<(Dataset, Dataset)> {
        let train = normalize(&load_mnist(&self.train_images, &self.train_labels)?);
        let test = normalize(&load_mnist(&self.test_images, &self.test_labels)?);
        Ok((train, test))
    }
}

/// CIFAR-10 `data_batch_{1..5}.bin` and `test_batch.bin`.
pub fn locate_cifar10(dir: impl AsRef<Path>) -> Result<(Vec<PathBuf>, PathBuf)> {
    let dir = dir.as_ref();
    for base in [
        dir.to_path_buf(),
        dir.join("cifar-10-batches-bin"),
        dir.join("cifar10"),
    ] {
        let train: Vec<PathBuf> = (1..=5).map(|i| base.join(format!("data_batch_{i}.bin"))).collect();
        let test = base.join("test_batch.bin");
        if train.iter().all(|p| p.is_file()) && test.is_file() {
            return Ok((train, test));
        }
    }
    Err(Error::DatasetMissing(dir.to_path_buf()))
}

/// `Σ_{i<r} (r - i) u_i v_iᵀ + noise * G` with random orthonormal `u`, `v`
/// and i.i.d. standard normal `G`.
pub fn synth_lowrank<R: Rng + ?Sized>(m: usize, n: usize, r: usize, noise: f64, rng: &mut R) -> Result<DenseMatrix> {
    if r == 0 || r > m.min(n) {
        return Err(Error::RankTooLarge { rank: r, rows: m, cols: n });
    }
    let u = random_orthonormal(m, r, rng);
    let v = random_orthonormal(n, r, rng);
    let mut x = DenseMatrix::zeros(m, n);
    for k in 0..r {
        let s = (r - k) as f64;
        for (i, &ui) in u[k].iter().enumerate() {
            let c = s * ui;
            if c != 0.0 {
                axpy(c, &v[k], x.row_mut(i));
            }
        }
    }
    if noise != 0.0 {
        for v in x.as_mut_slice() {
            let g: f64 = rng.sample(StandardNormal);
            *v += noise * g;
        }
    }
    Ok(x)
}

/// `k` orthonormal vectors of length `n` (Gaussian + two-pass Gram-Schmidt).
pub fn random_orthonormal<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
    while out.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &out {
                let p = dot(&v, q);
                axpy(-p, q, &mut v);
            }
        }
        let nrm = dot(&v, &v).sqrt();
        if nrm > 1e-8 {
            v.iter_mut().for_each(|e| *e /= nrm);
            out.push(v);
        }
    }
    out
}

/// Matrix with i.i.d. standard normal entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> DenseMatrix {
    let data = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    DenseMatrix::from_raw(m, n, data)
}
