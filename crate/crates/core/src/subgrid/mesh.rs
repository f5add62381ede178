use crate::error::{Error, Result};

/// Logarithmically stretched wall-normal node set. The wall itself (y = 0)
/// is not a node.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgridMesh {
    /// Node wall distances [m], geometric from `y_first` to `y_bulk`.
    pub y: Vec<f64>,
}

pub fn build_mesh(y_bulk: f64, n_nodes: usize, first_node_ratio: f64) -> Result<SubgridMesh> {
    if !(y_bulk > 0.0 && y_bulk.is_finite()) {
        return Err(Error::BadMeshSpec(format!("y_bulk must be positive, got {y_bulk}")));
    }
    if n_nodes < 3 {
        return Err(Error::BadMeshSpec(format!("need at least 3 nodes, got {n_nodes}")));
    }
    if !(first_node_ratio > 0.0 && first_node_ratio < 1.0) {
        return Err(Error::BadMeshSpec(format!(
            "first node ratio must lie in (0, 1), got {first_node_ratio}"
        )));
    }
    let last = (n_nodes - 1) as f64;
    let ln_ratio = first_node_ratio.ln();
    let mut y: Vec<f64> = (0..n_nodes)
        .map(|i| y_bulk * (ln_ratio * (last - i as f64) / last).exp())
        .collect();
    y[0] = y_bulk * first_node_ratio;
    y[n_nodes - 1] = y_bulk;
    Ok(SubgridMesh { y })
}

impl SubgridMesh {
    pub fn n_nodes(&self) -> usize {
        self.y.len()
    }

    pub fn y_first(&self) -> f64 {
        self.y[0]
    }

    pub fn y_bulk(&self) -> f64 {
        self.y[self.y.len() - 1]
    }

    pub fn y_plus(&self, u_tau: f64, nu_wall: f64) -> Vec<f64> {
        self.y.iter().map(|y| u_tau * y / nu_wall).collect()
    }

    /// Node distances with the wall point prepended.
    pub fn with_wall(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.y.iter().copied()).collect()
    }
}
