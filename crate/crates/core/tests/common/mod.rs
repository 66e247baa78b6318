#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use hitchin::atlas::LiftAtlas;
use hitchin::coords::CoordinateVector;
use hitchin::lamination::{Lamination, LaminationComplex};
use hitchin::representation::Representation;

pub const STEMS: [&str; 2] = ["pants", "single-leaf"];

pub struct Fixture {
    pub lam: Lamination,
    pub atlas: LiftAtlas,
    pub fuchsian: Representation,
    pub shears: CoordinateVector,
}

pub fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "data", name].iter().collect();
    fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn complex(stem: &str) -> LaminationComplex {
    LaminationComplex::from_json(&data(&format!("{stem}.lamination.json"))).unwrap()
}

pub fn fixture(stem: &str) -> Fixture {
    Fixture {
        lam: Lamination::new(complex(stem)).unwrap(),
        atlas: LiftAtlas::from_json(&data(&format!("{stem}.atlas.json"))).unwrap(),
        fuchsian: serde_json::from_str(&data(&format!("{stem}.fuchsian.json"))).unwrap(),
        shears: serde_json::from_str(&data(&format!("{stem}.shears.json"))).unwrap(),
    }
}
