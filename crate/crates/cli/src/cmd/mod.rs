pub mod approx_id;
pub mod bundle;
pub mod estimates;
pub mod norms;
pub mod orbit;
pub mod star;
