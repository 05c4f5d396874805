//! Local ZX rewrite rules. Each rule either applies and preserves the
//! diagram's linear map up to a nonzero scalar, or fails with
//! [`Error::RewriteMismatch`] and leaves the diagram untouched.

use crate::diagram::{Boundary, Color, EdgeKind, SpiderId, ZXDiagram};
use crate::error::{Error, Result};
use crate::phase::Phase;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rewrite {
    /// Merge two same-colored spiders joined by a regular wire.
    Fuse(SpiderId, SpiderId),
    /// Swap a spider's color, toggling the kind of every leg.
    ColorChange(SpiderId),
    /// Push an arity-2 π spider through an adjacent spider of the other color.
    PiCopy { pi: SpiderId, target: SpiderId },
    /// Remove an arity-2 phase-0 spider, joining its two legs.
    IdentityRemove(SpiderId),
    /// Remove an arity-2 phase-0 spider whose legs are both Hadamard,
    /// leaving a regular connection.
    HadamardCancel(SpiderId),
    /// Delete a pair of parallel wires between two spiders.
    Hopf(SpiderId, SpiderId),
    /// Commute a phase-free Z spider past a phase-free X spider.
    Bialgebra(SpiderId, SpiderId),
}

impl Rewrite {
    pub fn name(&self) -> &'static str {
        match self {
            Rewrite::Fuse(..) => "fuse",
            Rewrite::ColorChange(_) => "color_change",
            Rewrite::PiCopy { .. } => "pi_copy",
            Rewrite::IdentityRemove(_) => "identity_remove",
            Rewrite::HadamardCancel(_) => "hadamard_cancel",
            Rewrite::Hopf(..) => "hopf",
            Rewrite::Bialgebra(..) => "bialgebra",
        }
    }
}

/// One leg of a spider: a wire (by index) or a boundary (input/output rank).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Leg {
    Wire(usize),
    Input(usize),
    Output(usize),
}

fn legs(d: &ZXDiagram, v: SpiderId) -> Vec<Leg> {
    let mut out: Vec<Leg> = d.incident(v).into_iter().map(Leg::Wire).collect();
    out.extend(d.inputs.iter().enumerate().filter(|(_, b)| b.spider == v).map(|(r, _)| Leg::Input(r)));
    out.extend(d.outputs.iter().enumerate().filter(|(_, b)| b.spider == v).map(|(r, _)| Leg::Output(r)));
    out
}

fn leg_kind(d: &ZXDiagram, leg: Leg) -> EdgeKind {
    match leg {
        Leg::Wire(i) => d.wires()[i].kind,
        Leg::Input(r) => d.inputs[r].kind,
        Leg::Output(r) => d.outputs[r].kind,
    }
}

/// Moves leg `leg` of `from` onto `to`, composing its kind with `extra`.
fn move_leg(d: &mut ZXDiagram, leg: Leg, from: SpiderId, to: SpiderId, extra: EdgeKind) {
    let b: &mut Boundary = match leg {
        Leg::Wire(i) => {
            let w = &mut d.wires_mut()[i];
            if w.a == from {
                w.a = to;
            } else {
                w.b = to;
            }
            w.kind = w.kind.compose(extra);
            return;
        }
        Leg::Input(r) => &mut d.inputs[r],
        Leg::Output(r) => &mut d.outputs[r],
    };
    b.spider = to;
    b.kind = b.kind.compose(extra);
}

fn has_self_loop(d: &ZXDiagram, v: SpiderId) -> bool {
    d.wires().iter().any(|w| w.a == v && w.b == v)
}

pub fn apply_rewrite(d: &mut ZXDiagram, rule: Rewrite) -> Result<()> {
    let name = rule.name();
    let mismatch = |reason: String| Error::RewriteMismatch { rule: name, reason };
    match rule {
        Rewrite::Fuse(a, b) => {
            d.spider(a)?;
            d.spider(b)?;
            if a == b {
                return Err(mismatch("cannot fuse a spider with itself".into()));
            }
            if d.color(a) != d.color(b) {
                return Err(mismatch(format!("{a} and {b} have different colors")));
            }
            let between = d.wires_between(a, b);
            let Some(&link) = between.iter().find(|&&i| d.wires()[i].kind == EdgeKind::Regular) else {
                return Err(mismatch(format!("no regular wire joins {a} and {b}")));
            };
            d.remove_wire(link);
            let phase = d.phase(a) + d.phase(b);
            d.set_phase(a, phase);
            d.redirect(b, a);
            d.remove_spider(b)?;
        }
        Rewrite::ColorChange(v) => {
            let s = d.spider_mut(v)?;
            s.color = match s.color {
                Color::Z => Color::X,
                Color::X => Color::Z,
            };
            for w in d.wires_mut().iter_mut() {
                if w.touches(v) && !w.is_self_loop() {
                    w.kind = w.kind.toggled();
                }
            }
            for b in d.inputs.iter_mut().chain(d.outputs.iter_mut()) {
                if b.spider == v {
                    b.kind = b.kind.toggled();
                }
            }
        }
        Rewrite::PiCopy { pi, target } => {
            let s = *d.spider(pi)?;
            let t = *d.spider(target)?;
            if s.phase != Phase::PI {
                return Err(mismatch(format!("{pi} does not carry phase π")));
            }
            if s.color == t.color {
                return Err(mismatch(format!("{pi} and {target} share a color")));
            }
            let pl = legs(d, pi);
            if pl.len() != 2 || has_self_loop(d, pi) {
                return Err(mismatch(format!("{pi} is not an arity-2 spider")));
            }
            if has_self_loop(d, target) {
                return Err(mismatch(format!("{target} has a self-loop")));
            }
            let Some(&link_leg) = pl.iter().find(|l| {
                matches!(l, Leg::Wire(i) if d.wires()[*i].touches(target) && d.wires()[*i].kind == EdgeKind::Regular)
            }) else {
                return Err(mismatch(format!("no regular wire joins {pi} and {target}")));
            };
            let Leg::Wire(link) = link_leg else { unreachable!() };
            let far_leg = *pl.iter().find(|&&l| l != link_leg).unwrap();
            if matches!(far_leg, Leg::Wire(i) if d.wires()[i].touches(target)) {
                return Err(mismatch(format!("both legs of {pi} reach {target}")));
            }
            // π copies onto every other leg of the target
            for leg in legs(d, target) {
                if leg == Leg::Wire(link) {
                    continue;
                }
                let copy = d.add_spider(crate::diagram::Spider { color: s.color, phase: Phase::PI });
                move_leg(d, leg, target, copy, EdgeKind::Regular);
                d.add_wire(copy, target, EdgeKind::Regular)?;
            }
            d.set_phase(target, -t.phase);
            // the π spider's far leg now attaches directly to the target
            move_leg(d, far_leg, pi, target, EdgeKind::Regular);
            d.remove_wire(link);
            d.remove_spider(pi)?;
        }
        Rewrite::IdentityRemove(v) | Rewrite::HadamardCancel(v) => {
            let s = *d.spider(v)?;
            if !s.phase.is_zero() {
                return Err(mismatch(format!("{v} has nonzero phase")));
            }
            let l = legs(d, v);
            if l.len() != 2 || has_self_loop(d, v) {
                return Err(mismatch(format!("{v} is not an arity-2 spider")));
            }
            let (k0, k1) = (leg_kind(d, l[0]), leg_kind(d, l[1]));
            if matches!(rule, Rewrite::HadamardCancel(_))
                && (k0 != EdgeKind::Hadamard || k1 != EdgeKind::Hadamard)
            {
                return Err(mismatch(format!("{v} is not flanked by two Hadamard wires")));
            }
            match (l[0], l[1]) {
                (Leg::Wire(i), Leg::Wire(j)) => {
                    let (x, y) = (d.wires()[i].other(v), d.wires()[j].other(v));
                    d.remove_spider(v)?;
                    d.add_wire(x, y, k0.compose(k1))?;
                }
                (Leg::Wire(i), boundary) | (boundary, Leg::Wire(i)) => {
                    let x = d.wires()[i].other(v);
                    let k = d.wires()[i].kind;
                    move_leg(d, boundary, v, x, k);
                    d.remove_spider(v)?;
                }
                _ => return Err(mismatch(format!("{v} joins two boundaries directly"))),
            }
        }
        Rewrite::Hopf(a, b) => {
            d.spider(a)?;
            d.spider(b)?;
            if a == b {
                return Err(mismatch("hopf needs two distinct spiders".into()));
            }
            let want = if d.color(a) == d.color(b) { EdgeKind::Hadamard } else { EdgeKind::Regular };
            let pair: Vec<usize> =
                d.wires_between(a, b).into_iter().filter(|&i| d.wires()[i].kind == want).take(2).collect();
            if pair.len() < 2 {
                return Err(mismatch(format!("{a} and {b} lack two parallel {want:?} wires")));
            }
            d.remove_wires(pair);
        }
        Rewrite::Bialgebra(a, b) => {
            let (sa, sb) = (*d.spider(a)?, *d.spider(b)?);
            if sa.color == sb.color {
                return Err(mismatch(format!("{a} and {b} share a color")));
            }
            if !sa.phase.is_zero() || !sb.phase.is_zero() {
                return Err(mismatch("bialgebra needs phase-free spiders".into()));
            }
            let between = d.wires_between(a, b);
            if between.len() != 1 || d.wires()[between[0]].kind != EdgeKind::Regular {
                return Err(mismatch(format!("{a} and {b} must share exactly one regular wire")));
            }
            if has_self_loop(d, a) || has_self_loop(d, b) {
                return Err(mismatch("bialgebra spiders must not have self-loops".into()));
            }
            let link = between[0];
            let mut new_a = Vec::new();
            let mut new_b = Vec::new();
            for (v, color, fresh) in [(a, sb.color, &mut new_a), (b, sa.color, &mut new_b)] {
                for leg in legs(d, v) {
                    if leg == Leg::Wire(link) {
                        continue;
                    }
                    let s = d.add_spider(crate::diagram::Spider { color, phase: Phase::ZERO });
                    move_leg(d, leg, v, s, EdgeKind::Regular);
                    fresh.push(s);
                }
            }
            for &x in &new_a {
                for &y in &new_b {
                    d.add_wire(x, y, EdgeKind::Regular)?;
                }
            }
            d.remove_spider(a)?;
            d.remove_spider(b)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{contract_tensor, equal_up_to_scalar};

    fn same(a: &ZXDiagram, b: &ZXDiagram) -> bool {
        equal_up_to_scalar(&contract_tensor(a).unwrap(), &contract_tensor(b).unwrap(), 1e-9).unwrap()
    }

    fn check(d: &ZXDiagram, rule: Rewrite) -> ZXDiagram {
        let mut e = d.clone();
        apply_rewrite(&mut e, rule).unwrap();
        assert!(same(d, &e), "{} changed the tensor", rule.name());
        e
    }

    fn line(colors: &[(Color, Phase)]) -> (ZXDiagram, Vec<SpiderId>) {
        let mut d = ZXDiagram::new();
        let ids: Vec<SpiderId> =
            colors.iter().map(|&(color, phase)| d.add_spider(crate::diagram::Spider { color, phase })).collect();
        for w in ids.windows(2) {
            d.add_wire(w[0], w[1], EdgeKind::Regular).unwrap();
        }
        d.add_input(ids[0], EdgeKind::Regular);
        d.add_output(*ids.last().unwrap(), EdgeKind::Regular);
        (d, ids)
    }

    #[test]
    fn fuse_adds_phases() {
        let (d, ids) = line(&[(Color::Z, Phase::new(1, 2)), (Color::Z, Phase::new(1, 1))]);
        let e = check(&d, Rewrite::Fuse(ids[0], ids[1]));
        assert_eq!(e.spider_count(), 1);
        assert_eq!(e.phase(ids[0]), Phase::new(3, 2));
    }

    #[test]
    fn fuse_rejects_mixed_colors_untouched() {
        let (mut d, ids) = line(&[(Color::Z, Phase::ZERO), (Color::X, Phase::ZERO)]);
        let before = d.clone();
        let err = apply_rewrite(&mut d, Rewrite::Fuse(ids[0], ids[1])).unwrap_err();
        assert!(matches!(err, Error::RewriteMismatch { rule: "fuse", .. }));
        assert!(d.structurally_equal(&before));
    }

    #[test]
    fn color_change_preserves_tensor() {
        let (mut d, ids) = line(&[(Color::X, Phase::new(1, 2)), (Color::Z, Phase::new(3, 2))]);
        d.add_output(ids[0], EdgeKind::Hadamard);
        d.add_wire(ids[0], ids[0], EdgeKind::Hadamard).unwrap();
        let e = check(&d, Rewrite::ColorChange(ids[0]));
        assert_eq!(e.color(ids[0]), Color::Z);
    }

    #[test]
    fn pi_copy_preserves_tensor() {
        let (mut d, ids) = line(&[(Color::X, Phase::PI), (Color::Z, Phase::new(1, 2))]);
        d.add_output(ids[1], EdgeKind::Hadamard);
        let e = check(&d, Rewrite::PiCopy { pi: ids[0], target: ids[1] });
        assert_eq!(e.phase(ids[1]), Phase::new(7, 2));
    }

    #[test]
    fn identity_and_hadamard_removal() {
        let (mut d, ids) = line(&[(Color::Z, Phase::new(1, 2)), (Color::Z, Phase::ZERO), (Color::X, Phase::new(1, 2))]);
        let i = d.wires_between(ids[0], ids[1])[0];
        d.wires_mut()[i].kind = EdgeKind::Hadamard;
        let j = d.wires_between(ids[1], ids[2])[0];
        d.wires_mut()[j].kind = EdgeKind::Hadamard;
        let e = check(&d, Rewrite::HadamardCancel(ids[1]));
        assert_eq!(e.wires()[0].kind, EdgeKind::Regular);
        check(&d, Rewrite::IdentityRemove(ids[1]));
        let (d, ids) = line(&[(Color::Z, Phase::ZERO), (Color::X, Phase::PI)]);
        check(&d, Rewrite::IdentityRemove(ids[0]));
    }

    #[test]
    fn hopf_both_variants() {
        let (mut d, ids) = line(&[(Color::Z, Phase::ZERO), (Color::X, Phase::ZERO)]);
        d.add_wire(ids[0], ids[1], EdgeKind::Regular).unwrap();
        d.add_wire(ids[0], ids[1], EdgeKind::Regular).unwrap();
        check(&d, Rewrite::Hopf(ids[0], ids[1]));
        let (mut d, ids) = line(&[(Color::Z, Phase::new(1, 2)), (Color::Z, Phase::new(1, 3))]);
        d.add_wire(ids[0], ids[1], EdgeKind::Hadamard).unwrap();
        d.add_wire(ids[0], ids[1], EdgeKind::Hadamard).unwrap();
        check(&d, Rewrite::Hopf(ids[0], ids[1]));
    }

    #[test]
    fn bialgebra_preserves_tensor() {
        let mut d = ZXDiagram::new();
        let a = d.z(Phase::ZERO);
        let b = d.x(Phase::ZERO);
        d.add_wire(a, b, EdgeKind::Regular).unwrap();
        d.add_input(a, EdgeKind::Regular);
        d.add_input(a, EdgeKind::Hadamard);
        d.add_output(b, EdgeKind::Regular);
        d.add_output(b, EdgeKind::Regular);
        let e = check(&d, Rewrite::Bialgebra(a, b));
        assert_eq!(e.spider_count(), 4);
        assert_eq!(e.wire_count(), 4);
    }
}
