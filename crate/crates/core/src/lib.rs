//! Hard-core model with countably many spin values on the Cayley tree.
//!
//! A configuration assigns an integer spin to every vertex of the rooted
//! k-ary tree; adjacent spins may not both be nonzero, and spin j carries
//! the activity weight λ_j (spin 0 weighs 1). Consistent boundary laws for
//! this model collapse onto the ray spanned by λ, so the whole consistency
//! problem reduces to the scalar map f(x) = (1+x‖λ‖)^{−k}:
//!
//! * below the critical total activity Λ_cr = k^k/(k−1)^{k+1} there is one
//!   translation-invariant law ξ ([`dynamics`]);
//! * above it a 2-cycle (α*, β*) appears and carries two period-two laws;
//! * inside the contractive window Λ ∈ (Λ_cr, 1/(β*−α*)) every infinite
//!   path of the tree supports its own boundary law interpolating the two
//!   phases, and the root value z₀(t) is strictly decreasing in the path
//!   code t ∈ [0,1] — an uncountable family of distinct laws ([`bg`]);
//! * each law induces finite-volume measures that can be sampled exactly
//!   and cross-checked against brute-force enumeration ([`gibbs`]).
//!
//! ```
//! use hctree::{ActivitySpec, ModelParams};
//! use hctree::bg::{bg_root_value, BgParams, DEFAULT_MAX_DEPTH};
//! use hctree::path::PathCode;
//!
//! let activity = ActivitySpec::finite([(1, 2.1), (-1, 2.1)]).unwrap();
//! let params = BgParams::new(ModelParams::new(2, activity), 1e-10, DEFAULT_MAX_DEPTH).unwrap();
//! let z0 = bg_root_value(&PathCode::from_ratio(1, 2, 2).unwrap(), &params).unwrap();
//! assert!((z0.z0 - 1.0 / 4.2).abs() < 1e-9);
//! ```

pub mod activity;
pub mod bg;
pub mod dynamics;
pub mod gibbs;
pub mod path;
pub mod verify;

pub use activity::{critical_activity, ActivityError, ActivitySpec, ModelParams};
pub use bg::{BgError, BgParams, BoundaryLawField};
pub use dynamics::{DynamicsError, FixedPointData, OrbitClass, Regime, TwoCycle};
pub use gibbs::{AdmissibleConfiguration, GibbsError, MarginalTable};
pub use path::{BranchSide, PathCode, PathError, Vertex};
