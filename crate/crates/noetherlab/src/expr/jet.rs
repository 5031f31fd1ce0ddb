//! Jet-space bookkeeping for the two coordinate frames.

use super::{Expr, Symbol, Var};

/// Coordinate frame of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Mass Lagrangian coordinates `(t, s)` with dependent `phi`.
    Lagrangian,
    /// Eulerian coordinates `(t, x)` with dependents `rho`, `u`.
    Eulerian,
}

/// Direction of a total derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    /// `D_t` in either frame.
    T,
    /// `D_s` (Lagrangian) or `D_x` (Eulerian).
    Space,
}

/// Tracks the independent variables, dependents and the maximal jet order
/// (2); total derivatives of order-2 jets are refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JetContext {
    pub frame: Frame,
    pub max_order: u8,
}

impl JetContext {
    pub fn lagrangian() -> Self {
        JetContext { frame: Frame::Lagrangian, max_order: 2 }
    }

    pub fn eulerian() -> Self {
        JetContext { frame: Frame::Eulerian, max_order: 2 }
    }

    /// The independent variable a direction differentiates by.
    pub fn indep(&self, dir: Dir) -> Var {
        match (self.frame, dir) {
            (_, Dir::T) => Var::T,
            (Frame::Lagrangian, Dir::Space) => Var::S,
            (Frame::Eulerian, Dir::Space) => Var::X,
        }
    }

    /// Chain `v -> D_dir v` on symbols, or `None` when `v` is not lifted
    /// (independent variables, parameters).  Errors at the call site when
    /// the lift would exceed the tracked order.
    pub fn lift(&self, v: Var, dir: Dir) -> LiftResult {
        use LiftResult::*;
        match (self.frame, dir, v) {
            (_, Dir::T, Var::T) => One,
            (_, Dir::T, Var::S) | (_, Dir::T, Var::X) => Zero,
            (_, Dir::Space, Var::T) => Zero,
            (Frame::Lagrangian, Dir::Space, Var::S) => One,
            (Frame::Eulerian, Dir::Space, Var::X) => One,

            (Frame::Lagrangian, Dir::T, Var::Phi) => Jet(Var::PhiT),
            (Frame::Lagrangian, Dir::T, Var::PhiT) => Jet(Var::PhiTT),
            (Frame::Lagrangian, Dir::T, Var::PhiS) => Jet(Var::PhiTS),
            (Frame::Lagrangian, Dir::Space, Var::Phi) => Jet(Var::PhiS),
            (Frame::Lagrangian, Dir::Space, Var::PhiT) => Jet(Var::PhiTS),
            (Frame::Lagrangian, Dir::Space, Var::PhiS) => Jet(Var::PhiSS),
            (Frame::Lagrangian, _, Var::PhiTT | Var::PhiTS | Var::PhiSS) => Overflow,

            (Frame::Eulerian, Dir::T, Var::Rho) => Jet(Var::RhoT),
            (Frame::Eulerian, Dir::T, Var::U) => Jet(Var::UT),
            (Frame::Eulerian, Dir::Space, Var::Rho) => Jet(Var::RhoX),
            (Frame::Eulerian, Dir::Space, Var::U) => Jet(Var::UX),
            (Frame::Eulerian, _, Var::RhoT | Var::RhoX | Var::UT | Var::UX) => Overflow,

            // Foreign-frame symbols are treated as constants of the frame.
            _ => Zero,
        }
    }

    /// The dependent-variable symbols this frame differentiates.
    pub fn lifted_vars(&self) -> &'static [Var] {
        match self.frame {
            Frame::Lagrangian => &[Var::Phi, Var::PhiT, Var::PhiS],
            Frame::Eulerian => &[Var::Rho, Var::U],
        }
    }

    /// All symbols of this frame, with their jet orders.
    pub fn order_of(&self, sym: &Symbol) -> Option<u8> {
        let Symbol::Var(v) = sym else { return None };
        let o = match (self.frame, v) {
            (Frame::Lagrangian, Var::Phi) => 0,
            (Frame::Lagrangian, Var::PhiT | Var::PhiS) => 1,
            (Frame::Lagrangian, Var::PhiTT | Var::PhiTS | Var::PhiSS) => 2,
            (Frame::Eulerian, Var::Rho | Var::U) => 0,
            (Frame::Eulerian, Var::RhoT | Var::RhoX | Var::UT | Var::UX) => 1,
            _ => return None,
        };
        Some(o)
    }

    /// Maximal jet order of the frame's dependents occurring in `e`.
    pub fn order_in(&self, e: &Expr) -> u8 {
        e.symbols()
            .iter()
            .filter_map(|s| self.order_of(s))
            .max()
            .unwrap_or(0)
    }
}

pub enum LiftResult {
    Zero,
    One,
    Jet(Var),
    Overflow,
}
