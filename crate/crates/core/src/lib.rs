pub mod exactmath;
pub mod cohomology;
pub mod geometry;
pub mod givental;
pub mod mirror;
pub mod wdvv;
pub mod localgw;
