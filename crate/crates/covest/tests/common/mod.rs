//! Shared fixtures for the integration suites.

use std::sync::Arc;

use covest::gpovm::ErrorFunction;
use covest::groups::{make_group, make_rep, rep_power, Group, GroupFile, Mode, ProjectiveRep, RepFile};
use covest::irreps::RepContext;

pub fn cyclic(n: usize) -> Arc<Group> {
    Arc::new(make_group(&GroupFile::Cyclic { n }).unwrap())
}

pub fn chars_rep(group: &Arc<Group>, ks: &[i64]) -> ProjectiveRep {
    make_rep(
        group,
        &RepFile::Builtin {
            name: "chars".into(),
            d: None,
            ks: Some(ks.to_vec()),
        },
    )
    .unwrap()
}

pub fn dihedral3_defining() -> ProjectiveRep {
    let g = Arc::new(make_group(&GroupFile::Dihedral { n: 3 }).unwrap());
    make_rep(
        &g,
        &RepFile::Builtin {
            name: "defining".into(),
            d: None,
            ks: None,
        },
    )
    .unwrap()
}

pub fn hw2() -> ProjectiveRep {
    let g = Arc::new(make_group(&GroupFile::HeisenbergWeyl { d: 2 }).unwrap());
    make_rep(
        &g,
        &RepFile::Builtin {
            name: "hw".into(),
            d: Some(2),
            ks: None,
        },
    )
    .unwrap()
}

pub fn u1_modes_up_to(n: i64, q: usize) -> ProjectiveRep {
    let g = Arc::new(make_group(&GroupFile::U1 { q }).unwrap());
    let modes: Vec<Mode> = (0..=n).map(|k| Mode { k, mult: 1 }).collect();
    make_rep(&g, &RepFile::U1modes { modes }).unwrap()
}

pub fn ctx(rep: ProjectiveRep) -> RepContext {
    RepContext::new(rep).unwrap()
}

/// The built-in (representation, error) pairs exercised by the acceptance
/// criteria.
pub fn builtin_pairs() -> Vec<(String, RepContext, ErrorFunction)> {
    vec![
        (
            "z8-full-delta".into(),
            ctx(chars_rep(&cyclic(8), &(0..8).collect::<Vec<_>>())),
            ErrorFunction::delta(),
        ),
        (
            "z4-partial-delta".into(),
            ctx(chars_rep(&cyclic(4), &[0, 1])),
            ErrorFunction::delta(),
        ),
        (
            "dihedral3-delta".into(),
            ctx(dihedral3_defining()),
            ErrorFunction::delta(),
        ),
        (
            "dihedral3-gatefid".into(),
            ctx(dihedral3_defining()),
            ErrorFunction::gate_infidelity(),
        ),
        ("hw2-delta".into(), ctx(hw2()), ErrorFunction::delta()),
        (
            "u1-sine2".into(),
            ctx(u1_modes_up_to(4, 21)),
            ErrorFunction::sine_squared(),
        ),
    ]
}

pub fn two_copies(rep: &ProjectiveRep) -> ProjectiveRep {
    rep_power(rep, 2).unwrap()
}
