//! Binary Merkle tree over SHA-256. Odd layers duplicate their last node.

use sha2::{Digest, Sha256};
use thiserror::Error;

pub type Digest32 = [u8; 32];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MerkleError {
    #[error("a tree needs at least one leaf")]
    Empty,
    #[error("leaf index {index} out of range for {leaves} leaves")]
    Index { index: usize, leaves: usize },
    #[error("path of length {got} cannot address index {index}")]
    PathLength { index: usize, got: usize },
}

pub fn leaf_hash(leaf: &[u8]) -> Digest32 {
    let mut h = Sha256::new();
    h.update([0u8]);
    h.update(leaf);
    h.finalize().into()
}

pub fn node_hash(l: &Digest32, r: &Digest32) -> Digest32 {
    let mut h = Sha256::new();
    h.update([1u8]);
    h.update(l);
    h.update(r);
    h.finalize().into()
}

/// Digest of an all-padding subtree of the given height, used to lift a
/// tree to a fixed depth.
pub fn padding_digest(height: usize) -> Digest32 {
    let mut d = leaf_hash(b"sfslab/merkle-padding");
    for _ in 0..height {
        d = node_hash(&d, &d);
    }
    d
}

#[derive(Debug, Clone)]
pub struct MerkleTree {
    /// `layers[0]` are leaf digests, the last layer holds only the root.
    layers: Vec<Vec<Digest32>>,
}

impl MerkleTree {
    pub fn build<L: AsRef<[u8]>>(leaves: &[L]) -> Result<Self, MerkleError> {
        if leaves.is_empty() {
            return Err(MerkleError::Empty);
        }
        let mut layers = vec![leaves.iter().map(|l| leaf_hash(l.as_ref())).collect::<Vec<_>>()];
        while layers.last().unwrap().len() > 1 {
            let prev = layers.last().unwrap();
            let next = prev.chunks(2).map(|p| node_hash(&p[0], p.get(1).unwrap_or(&p[0]))).collect();
            layers.push(next);
        }
        Ok(Self { layers })
    }

    pub fn root(&self) -> Digest32 {
        self.layers.last().unwrap()[0]
    }

    pub fn n_leaves(&self) -> usize {
        self.layers[0].len()
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn prove(&self, index: usize) -> Result<Vec<Digest32>, MerkleError> {
        if index >= self.n_leaves() {
            return Err(MerkleError::Index { index, leaves: self.n_leaves() });
        }
        let mut path = Vec::with_capacity(self.depth());
        let mut i = index;
        for layer in &self.layers[..self.depth()] {
            let sib = i ^ 1;
            path.push(*layer.get(sib).unwrap_or(&layer[i]));
            i /= 2;
        }
        Ok(path)
    }

    /// Root of this tree placed as the leftmost subtree of a depth-`depth` tree
    /// whose other subtrees are padding.
    pub fn lifted_root(&self, depth: usize) -> Digest32 {
        assert!(depth >= self.depth());
        (self.depth()..depth).fold(self.root(), |acc, h| node_hash(&acc, &padding_digest(h)))
    }

    pub fn prove_lifted(&self, index: usize, depth: usize) -> Result<Vec<Digest32>, MerkleError> {
        let mut path = self.prove(index)?;
        path.extend((self.depth()..depth).map(padding_digest));
        Ok(path)
    }
}

pub fn verify(root: &Digest32, index: usize, leaf: &[u8], path: &[Digest32]) -> Result<bool, MerkleError> {
    if path.len() < usize::BITS as usize && index >> path.len() != 0 {
        return Err(MerkleError::PathLength { index, got: path.len() });
    }
    let mut acc = leaf_hash(leaf);
    let mut i = index;
    for sib in path {
        acc = if i & 1 == 0 { node_hash(&acc, sib) } else { node_hash(sib, &acc) };
        i >>= 1;
    }
    Ok(acc == *root)
}
