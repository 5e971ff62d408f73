use std::collections::BTreeSet;

use crate::vcs::FileDelta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Diffusion {
    pub ns: usize,
    pub nd: usize,
    pub nf: usize,
}

/// First path component; root-level files belong to subsystem `""`.
pub fn subsystem_of(path: &str) -> &str {
    match path.split_once('/') {
        Some((head, _)) => head,
        None => "",
    }
}

/// Containing directory; root-level files belong to directory `""`.
pub fn directory_of(path: &str) -> &str {
    path.rsplit_once('/').map_or("", |(dir, _)| dir)
}

pub fn diffusion_metrics(delta: &[FileDelta]) -> Diffusion {
    let subsystems: BTreeSet<&str> = delta.iter().map(|d| subsystem_of(&d.path)).collect();
    let directories: BTreeSet<&str> = delta.iter().map(|d| directory_of(&d.path)).collect();
    Diffusion {
        ns: subsystems.len(),
        nd: directories.len(),
        nf: delta.len(),
    }
}
