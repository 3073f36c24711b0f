//! Nonparametric spectral graph analysis.
//!
//! A weighted undirected graph is viewed as a joint distribution over pairs of
//! vertices. Its GraField kernel `C(x,y) = P(x,y) / (p(x) p(y))` is expanded in
//! an orthonormal basis of vertex functions, and the resulting G-matrix
//! eigenproblem `MΘ = SΘΛ` yields a spectral embedding. Choosing the basis
//! recovers familiar operators: block pulses give the normalized Laplacian,
//! characteristic functions give the modularity matrix, and a small set of
//! orthonormal polynomials (the LP basis) gives a compressed fast solver.
//!
//! Every routine is generic over the scalar type. Exact arithmetic is
//! available wherever no square roots are involved, for example
//! [`GraField`] with `num_rational::BigRational`.
//!
//! ```
//! use grafield::{build_graph, unified_spectral, BasisSpec, EngineOptions};
//!
//! let g = build_graph(4, &[(0, 1, 2.0), (1, 2, 3.0), (1, 3, 3.0), (2, 3, 3.0)]).unwrap();
//! let emb = unified_spectral(&g, BasisSpec::BlockPulse, None, 2, &EngineOptions::default()).unwrap();
//! assert_eq!(emb.coordinates.dim(), (4, 2));
//! ```

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bases;
pub mod changepoint;
pub mod engine;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod operators;
pub mod scalar;
pub mod smoothing;

pub use bases::{
    bpf_basis, bpf_on_support, build_grafield, char_basis, char_on_support, lp_basis,
    lp_rank_cap, lp_score, BasisKind, BasisValues, GraField, OrthonormalBasis,
};
pub use changepoint::{
    detect_changepoints, kmeans_1d, phi2_graph, phi_squared, ChangePointReport, EventMatrix,
};
pub use engine::{
    gmatrix, gmatrix_from_network, graph_distributions, lp_spectral, solve_generalized,
    unified_spectral, BasisSpec, EngineOptions, GMatrix, GeneralizedEigen, GraphEmbedding,
    Method, SpectrumView,
};
pub use error::{Error, Result};
pub use graph::{
    build_graph, build_graph_with, empirical_network_pmf, empirical_vertex_pmf, Adjacency,
    Graph, GraphOptions, NetworkDistribution, Provenance, VertexDistribution,
};
pub use operators::{
    diffusion_distance, diffusion_map, laplacian, laplacian_star, modularity, pagerank_matrix,
    pagerank_scores, random_walk, reg_laplacian_type1, reg_laplacian_type2,
    reg_laplacian_type3, DiffusionCoordinates, OperatorKind, OperatorMatrix,
};
pub use scalar::{Real, Scalar};
pub use smoothing::{
    good_turing, laplace_smooth_network, laplace_smooth_vertex, mse_risk, resolve_tau,
    risk_curve, smooth_transition, stein_optimal_tau, RiskCurve, Tau, TauChoice, TauKind,
};

pub type Graph64 = Graph<f64>;
pub type Graph32 = Graph<f32>;
pub type VertexDistribution64 = VertexDistribution<f64>;
pub type NetworkDistribution64 = NetworkDistribution<f64>;
pub type GraField64 = GraField<f64>;
pub type OrthonormalBasis64 = OrthonormalBasis<f64>;
pub type GraphEmbedding64 = GraphEmbedding<f64>;
pub type GraphEmbedding32 = GraphEmbedding<f32>;
pub type OperatorMatrix64 = OperatorMatrix<f64>;
pub type ChangePointReport64 = ChangePointReport<f64>;
pub type Tau64 = Tau<f64>;
