//! The normalized Alexander polynomial and its one-variable specialization
//! along a balanced edge coloring.

use num_traits::Signed;

use crate::diagram::{BasePoint, Diagram};
use crate::error::{Error, Result};
use crate::graphalg::{check_balance, Coloring, Digraph};
use crate::lattice::{HalfMonomial, MeridianMap};
use crate::ring::{GroupRingElement, RingFraction};
use crate::rotation::rot;
use crate::statesum::{default_base, state_sum_at};

#[derive(Debug, Clone)]
pub struct AlexanderValue {
    /// `-Rot^(1/2) <D>`
    pub value: RingFraction,
    pub basis: Vec<String>,
    pub rot: HalfMonomial,
    pub raw_sum: RingFraction,
    /// set when the value clears to a Laurent polynomial
    pub polynomial: Option<GroupRingElement>,
}

pub fn alexander(d: &Diagram) -> Result<AlexanderValue> {
    let m = d.lattice()?.meridian_map();
    alexander_with(d, &m, None)
}

/// Value over the basis given by the listed edges.
pub fn alexander_in_basis(d: &Diagram, names: &[String]) -> Result<AlexanderValue> {
    let m = d.lattice()?.with_basis(names)?.meridian_map();
    alexander_with(d, &m, None)
}

pub fn alexander_with(d: &Diagram, m: &MeridianMap, base: Option<&BasePoint>) -> Result<AlexanderValue> {
    let base = match base {
        Some(b) => b.clone(),
        None => default_base(d)?,
    };
    let raw_sum = state_sum_at(d, &base, m)?.value;
    let r = rot(d, m)?;
    let value = raw_sum.scale_monomial(&r.sqrt()?).neg().canonicalize();
    let polynomial = value.as_polynomial();
    Ok(AlexanderValue {
        value,
        basis: m.names.clone(),
        rot: r,
        raw_sum,
        polynomial,
    })
}

/// Images of the basis generators under `b -> t^c(b)`.
fn coloring_images(names: &[String], c: &Coloring) -> Result<Vec<HalfMonomial>> {
    names
        .iter()
        .map(|b| {
            let x = c.get(b).ok_or_else(|| Error::UnknownEdge(b.clone()))?;
            if !x.is_integer() {
                return Err(Error::NonIntegralColoring(b.clone()));
            }
            Ok(HalfMonomial::from_exponents(&[*x.numer()]))
        })
        .collect()
}

fn checked(d: &Diagram, c: &Coloring) -> Result<()> {
    check_balance(&Digraph::from_diagram(d)?, c)
}

/// `Phi_c` applied to a fraction over the basis `names`.
pub fn specialize_fraction(f: &RingFraction, names: &[String], c: &Coloring) -> Result<RingFraction> {
    f.map(&coloring_images(names, c)?, 1)
}

pub fn specialize_monomial(x: &HalfMonomial, names: &[String], c: &Coloring) -> Result<HalfMonomial> {
    Ok(x.map(&coloring_images(names, c)?, 1))
}

/// `Phi_c` of a value computed on `d`; the coloring must balance at every
/// vertex of `d`.
pub fn specialize(d: &Diagram, f: &RingFraction, names: &[String], c: &Coloring) -> Result<RingFraction> {
    checked(d, c)?;
    specialize_fraction(f, names, c)
}

/// Meridians in one variable `t` with `t_e = t^c(e)`.
pub fn single_variable_map(d: &Diagram, c: &Coloring) -> Result<MeridianMap> {
    checked(d, c)?;
    let mut meridians = std::collections::BTreeMap::new();
    for e in d.edge_ids() {
        let x = c.get(&e).ok_or_else(|| Error::UnknownEdge(e.clone()))?;
        if !x.is_integer() {
            return Err(Error::NonIntegralColoring(e));
        }
        meridians.insert(e, HalfMonomial::from_exponents(&[*x.numer()]));
    }
    Ok(MeridianMap {
        names: vec!["t".to_string()],
        meridians,
    })
}

/// `<D, c>`: the state sum run directly over the one-variable meridians.
pub fn colored_state_sum(d: &Diagram, c: &Coloring, base: Option<&BasePoint>) -> Result<RingFraction> {
    let m = single_variable_map(d, c)?;
    let base = match base {
        Some(b) => b.clone(),
        None => default_base(d)?,
    };
    Ok(state_sum_at(d, &base, &m)?.value)
}

/// Both routes to the specialized state sum.
#[derive(Debug, Clone)]
pub struct SpecializationCheck {
    pub specialized: RingFraction,
    pub direct: RingFraction,
    pub agree: bool,
}

pub fn specialization_check(d: &Diagram, c: &Coloring) -> Result<SpecializationCheck> {
    let m = d.lattice()?.meridian_map();
    let base = default_base(d)?;
    let sum = state_sum_at(d, &base, &m)?.value;
    let specialized = specialize(d, &sum, &m.names, c)?;
    let direct = colored_state_sum(d, c, Some(&base))?;
    let agree = specialized.fraction_eq(&direct)?;
    Ok(SpecializationCheck {
        specialized,
        direct,
        agree,
    })
}

fn half_bracket_t() -> GroupRingElement {
    let h = HalfMonomial::from_halves(vec![1]);
    GroupRingElement::binomial(h.clone(), h.inv())
}

#[derive(Debug, Clone)]
pub struct MoyCheck {
    /// `Phi_c` of the multi-variable value
    pub lhs: RingFraction,
    /// the one-variable invariant of `(D, c)`
    pub colored: RingFraction,
    pub rhs: RingFraction,
    pub holds: bool,
}

/// Compare `Phi_c(Delta)` with the colored one-variable invariant times
/// `(t^(1/2) - t^(-1/2))^(|V|-1)`.
pub fn moy_relation_check(d: &Diagram, c: &Coloring) -> Result<MoyCheck> {
    for (id, v) in d.vertex_incidences() {
        if v.incoming.len() + v.outgoing.len() != 3 {
            return Err(Error::NotTrivalent(id));
        }
    }
    if c.values().any(|x| !x.is_positive()) {
        return Err(Error::UnbalancedColoring("coloring is not positive".into()));
    }
    let a = alexander(d)?;
    let lhs = specialize(d, &a.value, &a.basis, c)?;
    let nv = d.vertex_count() as u32;
    let exps = nv.saturating_sub(1);
    let phi_rot = specialize_monomial(&a.rot, &a.basis, c)?;
    // t^(phi/2) where phi is the integral exponent of Phi_c(Rot)
    let curl = HalfMonomial::from_halves(vec![phi_rot.halves()[0] / 2]);
    let bracket = half_bracket_t();
    let colored_sum = colored_state_sum(d, c, None)?;
    let colored = colored_sum
        .mul(&RingFraction::new(GroupRingElement::one(1), bracket.neg().pow(exps))?)
        .scale_monomial(&curl);
    let rhs = colored.mul(&RingFraction::from_element(bracket.pow(exps)));
    let holds = lhs.fraction_eq(&rhs)?;
    Ok(MoyCheck {
        lhs,
        colored,
        rhs,
        holds,
    })
}

/// `t_i -> t_i^k` on every basis variable.
pub fn scale_exponents(f: &RingFraction, k: i64) -> Result<RingFraction> {
    let r = f.rank();
    let images: Vec<HalfMonomial> = (0..r).map(|i| HalfMonomial::generator(r, i).pow(k)).collect();
    f.map(&images, r)
}
