//! Small shared helpers: atomic file output, percentiles, seeded RNG streams.

use std::io::Write;
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Write `contents` to `path` via a temporary file in the same directory
/// followed by a rename, so a failed run never leaves a partial file.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    let mut file = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(file);
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })?;
    let _ = dir; // directory fsync not required for test-scale outputs
    Ok(())
}

/// Linear-interpolation percentile of an unsorted slice, `p` in [0, 100].
pub fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rank = (p / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic RNG for a tagged substream of `seed`.
///
/// Parallel and serial runs stay identical because every trial derives its
/// own generator from `(seed, tags)` instead of sharing one stream.
pub fn rng_stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = seed ^ 0x5851f42d4c957f2d;
    for &t in tags {
        state ^= splitmix64(&mut state) ^ t.wrapping_mul(0xd1342543de82ef95);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Deterministic child seed for a tagged substream of `seed`.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut state = seed ^ 0x9e3779b97f4a7c15;
    let mut out = splitmix64(&mut state);
    for &t in tags {
        state ^= t.wrapping_mul(0xd1342543de82ef95);
        out ^= splitmix64(&mut state).rotate_left(17);
    }
    out
}

/// Population standard deviation (n in the denominator).
pub fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// Root mean square of a slice, 0 for empty input.
pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}
