fn main() {
    // System LAPACK/BLAS (Debian alternatives route these to OpenBLAS).
    println!("cargo:rustc-link-lib=dylib=lapack");
    println!("cargo:rustc-link-lib=dylib=blas");
}
