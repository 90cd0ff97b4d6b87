fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let out = std::path::Path::new(&crate_dir).join("include/nsc.h");
    std::fs::create_dir_all(out.parent().unwrap()).unwrap();
    cbindgen::generate(&crate_dir)
        .expect("header generation failed")
        .write_to_file(&out);
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
