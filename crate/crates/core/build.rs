use std::env;

// The system ships CBLAS inside libopenblas with no standalone libcblas.
// The shim directory holds a linker script mapping -lcblas onto it.
fn main() {
    let dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rustc-link-search=native={dir}/lapack-shim");
}
