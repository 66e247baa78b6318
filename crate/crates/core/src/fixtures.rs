//! The two genus-2 fixtures shipped with the crate, embedded at build time.
//!
//! `pants` has three closed leaves cutting the surface into two pairs of
//! pants; `single-leaf` has a single non-separating closed leaf. Each comes with
//! its lift atlas, a Fuchsian representation in `PSL_2` and that
//! representation's shear coordinates. The data is produced by the
//! `derive_fixtures` example and checked by the fixture tests.

use crate::atlas::LiftAtlas;
use crate::coords::CoordinateVector;
use crate::lamination::{Lamination, LaminationComplex};
use crate::representation::Representation;

pub const NAMES: [&str; 2] = ["pants", "single-leaf"];

pub struct Fixture {
    pub lamination: Lamination,
    pub atlas: LiftAtlas,
    pub fuchsian: Representation,
    pub shears: CoordinateVector,
}

/// The raw JSON documents `(lamination, atlas, fuchsian, shears)`.
pub fn sources(name: &str) -> Option<[&'static str; 4]> {
    match name {
        "pants" => Some([
            include_str!("../data/pants.lamination.json"),
            include_str!("../data/pants.atlas.json"),
            include_str!("../data/pants.fuchsian.json"),
            include_str!("../data/pants.shears.json"),
        ]),
        "single-leaf" => Some([
            include_str!("../data/single-leaf.lamination.json"),
            include_str!("../data/single-leaf.atlas.json"),
            include_str!("../data/single-leaf.fuchsian.json"),
            include_str!("../data/single-leaf.shears.json"),
        ]),
        _ => None,
    }
}

pub fn load(name: &str) -> Option<Fixture> {
    let [lam, atlas, rep, shears] = sources(name)?;
    let complex = LaminationComplex::from_json(lam).expect("embedded lamination parses");
    Some(Fixture {
        lamination: Lamination::new(complex).expect("embedded lamination validates"),
        atlas: LiftAtlas::from_json(atlas).expect("embedded atlas parses"),
        fuchsian: serde_json::from_str(rep).expect("embedded representation parses"),
        shears: serde_json::from_str(shears).expect("embedded shears parse"),
    })
}
