use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{DenoiseConfig, StepFlag, Trajectory};
use crate::error::{Error, Result};
use crate::tensor::{encode_tensor, io::write_atomic};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestFile {
    pub name: String,
    /// Denoising step the latent was taken after; absent for the final latent.
    pub step: Option<usize>,
    pub dims: [usize; 4],
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditioningRun {
    pub start: usize,
    pub end: usize,
    pub id: String,
}

/// Everything needed to reproduce and audit a run. Contains no timestamps,
/// so identical configs give byte-identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: DenoiseConfig,
    pub rng_algorithm: &'static str,
    pub flags: Vec<StepFlag>,
    pub conditioning: Option<Vec<ConditioningRun>>,
    pub files: Vec<ManifestFile>,
    pub final_sha256: String,
}

/// Writes `final.vlt`, one `step_NNNN.vlt` per snapshot, and `manifest.json`
/// into `outdir` (created if missing).
pub fn write_run(traj: &Trajectory, outdir: &Path) -> Result<(Manifest, String)> {
    fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;
    let mut files = Vec::new();
    let mut put = |name: String, step: Option<usize>, latent: &crate::tensor::VideoFeature| -> Result<String> {
        let bytes = encode_tensor(&latent.to_tensor());
        let digest = sha256_hex(&bytes);
        write_atomic(&outdir.join(&name), &bytes)?;
        files.push(ManifestFile { name, step, dims: latent.shape().dims(), sha256: digest.clone() });
        Ok(digest)
    };
    for (step, latent) in &traj.snapshots {
        put(format!("step_{step:04}.vlt"), Some(*step), latent)?;
    }
    let final_sha256 = put("final.vlt".to_string(), None, &traj.final_latent)?;

    let manifest = Manifest {
        config: traj.config.clone(),
        rng_algorithm: traj.rng_algorithm(),
        flags: traj.flags.clone(),
        conditioning: traj.conditioning.as_ref().map(|t| {
            t.runs().into_iter().map(|(start, end, id)| ConditioningRun { start, end, id: id.to_string() }).collect()
        }),
        files,
        final_sha256,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&outdir.join("manifest.json"), json.as_bytes())?;
    Ok((manifest, sha256_hex(json.as_bytes())))
}
