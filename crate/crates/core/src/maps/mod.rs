//! Exactly evaluable bi-Lipschitz maps and the constructions that combine
//! them: radial extension of sphere maps, replication of disk maps along
//! the ray and along translated disks, products, spirals and PL maps.

mod disk;
mod expr;
mod profile;
mod sphere;
mod spiral;
mod text;

pub use disk::{make_twist_disk_map, DiskKind, DiskMap};
pub use expr::{
    compose, disk_replication, jacobian_fd, locate_replication_disk, locate_translated_disk,
    product_map, radial_extension, replication_disk, spiral_map, translated_replication, MapExpr,
    MapNode, Replicas, MAX_REPLICAS,
};
pub use profile::{AngleProfile, Knot};
pub use sphere::{make_latitude_sphere_map, SphereKind, SphereMap, MAX_LATITUDE_BETA};
pub use spiral::{SpiralKind, SpiralProfile};
pub use text::{from_text, to_text};
