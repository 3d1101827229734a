use std::collections::BTreeMap;

use crate::error::{BuildError, Error};
use crate::geometry::{BoundaryMesh, Scene};
use crate::linalg::DenseComplexMatrix;
use crate::operators::{assemble_all, targets_of, OperatorSet};

/// Operators of `domain`'s wavenumber from `source` elements to `target`
/// collocation points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockKey {
    pub domain: u32,
    pub source: u32,
    pub target: u32,
}

impl std::fmt::Display for BlockKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "domain {} (interface {} -> interface {})", self.domain, self.source, self.target)
    }
}

/// Operator blocks keyed by domain and interface pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OperatorBlocks {
    blocks: BTreeMap<BlockKey, OperatorSet>,
}

impl OperatorBlocks {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every block any formulation on this scene can ask for: for each domain,
    /// all pairs of interfaces bounding it. Domains with equal wavenumbers
    /// share assembly work.
    pub fn assemble(scene: &Scene, mesh: &BoundaryMesh) -> Result<Self, Error> {
        let mut cache: BTreeMap<(u64, u32, u32), OperatorSet> = BTreeMap::new();
        let mut blocks = BTreeMap::new();
        for d in scene.domains() {
            let k = scene.wavenumber(d.id);
            for tgt in scene.interfaces_of(d.id) {
                for src in scene.interfaces_of(d.id) {
                    let cache_key = (k.to_bits(), src.id, tgt.id);
                    let set = match cache.get(&cache_key) {
                        Some(s) => s.clone(),
                        None => {
                            let sr = mesh.range(src.id).ok_or_else(|| missing(src.id))?;
                            let tr = mesh.range(tgt.id).ok_or_else(|| missing(tgt.id))?;
                            let s = assemble_all(mesh, sr, &targets_of(mesh, tr), k)?;
                            cache.insert(cache_key, s.clone());
                            s
                        }
                    };
                    blocks.insert(BlockKey { domain: d.id, source: src.id, target: tgt.id }, set);
                }
            }
        }
        Ok(Self { blocks })
    }

    /// Same keys as [`OperatorBlocks::assemble`] with every operator zero.
    pub fn zeros(scene: &Scene, mesh: &BoundaryMesh) -> Self {
        let mut blocks = BTreeMap::new();
        for d in scene.domains() {
            let k = scene.wavenumber(d.id);
            for tgt in scene.interfaces_of(d.id) {
                for src in scene.interfaces_of(d.id) {
                    let nr = mesh.range(tgt.id).map_or(0, |r| r.len());
                    let nc = mesh.range(src.id).map_or(0, |r| r.len());
                    let z = DenseComplexMatrix::zeros(nr, nc);
                    let set = OperatorSet {
                        wavenumber: k,
                        single: z.clone(),
                        double: z.clone(),
                        adjoint: z.clone(),
                        hyper: z,
                    };
                    blocks.insert(BlockKey { domain: d.id, source: src.id, target: tgt.id }, set);
                }
            }
        }
        Self { blocks }
    }

    pub fn insert(&mut self, key: BlockKey, set: OperatorSet) {
        self.blocks.insert(key, set);
    }

    pub fn remove(&mut self, key: &BlockKey) -> Option<OperatorSet> {
        self.blocks.remove(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &BlockKey> {
        self.blocks.keys()
    }

    /// Looks up a block and checks it was assembled at wavenumber `k`.
    pub fn get(&self, key: BlockKey, k: f64) -> Result<&OperatorSet, BuildError> {
        let set = self.blocks.get(&key).ok_or_else(|| BuildError::MissingBlock(key.to_string()))?;
        if set.wavenumber != k {
            return Err(BuildError::WavenumberMismatch { label: key.to_string(), expected: k, found: set.wavenumber });
        }
        Ok(set)
    }
}

fn missing(id: u32) -> Error {
    BuildError::MissingBlock(format!("mesh has no elements for interface {id}")).into()
}
