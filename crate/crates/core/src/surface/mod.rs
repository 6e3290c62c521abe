//! Forward model on the flat torus with a round hole.

pub mod annulus;
pub mod fem;
pub mod forms;
pub mod io;
pub mod mesh;

pub use mesh::{
    build_closed_torus, build_disk, build_mesh, build_mesh_with, BoundaryVertex, Cycle,
    EdgePair, MeshOptions, SurfaceKind, SurfaceModel,
};
