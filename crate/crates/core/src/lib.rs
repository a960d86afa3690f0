//! Building blocks for customized, 3D-printable multi-layer robotic hands.
//!
//! The pipeline starts from a scanned hand surface and a 25-point landmark
//! annotation:
//!
//! - [`mesh`] reads, writes and measures triangle meshes (STL and OBJ).
//! - [`landmarks`] holds the landmark schema, the bone topology and the
//!   mid-plane alignment of the scan.
//! - [`template_match`] fits a bone template to the annotated hand with one
//!   similarity transform per bone and places ligament holes.
//! - [`tissue`] builds the concentric-tube tissue shell around each bone.
//! - [`deformation`] compares force/strain curves to pick the tube thickness.
//! - [`kinematics`] simulates the single-cable tendon drive of a finger.
//!
//! All lengths are millimeters.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geom;
pub mod kinematics;
pub mod deformation;
pub mod landmarks;
pub mod mesh;
pub mod primitives;
pub mod template_match;
pub mod tissue;
