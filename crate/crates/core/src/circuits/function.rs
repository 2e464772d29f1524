use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{builders, Circuit, CircuitError};
use crate::bits::Bits;

/// A function usable as a black box by the protocols. Garbling additionally
/// needs [`BoolFunction::circuit`].
pub trait BoolFunction: Send + Sync {
    fn n_inputs(&self) -> usize;
    fn n_outputs(&self) -> usize;

    /// Evaluates on an input of the right length; callers check arity.
    fn eval_unchecked(&self, x: &Bits) -> Bits;

    fn eval(&self, x: &Bits) -> Result<Bits, CircuitError> {
        if x.len() != self.n_inputs() {
            return Err(CircuitError::Arity { expected: self.n_inputs(), got: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    fn circuit(&self) -> Option<&Circuit> {
        None
    }
}

impl BoolFunction for Circuit {
    fn n_inputs(&self) -> usize {
        Circuit::n_inputs(self)
    }
    fn n_outputs(&self) -> usize {
        Circuit::n_outputs(self)
    }
    fn eval_unchecked(&self, x: &Bits) -> Bits {
        Circuit::eval(self, x).expect("arity checked by caller")
    }
    fn circuit(&self) -> Option<&Circuit> {
        Some(self)
    }
}

type NativeEval = dyn Fn(&Bits) -> Bits + Send + Sync;

/// A function evaluated by Rust code rather than a circuit.
#[derive(Clone)]
pub struct NativeFn {
    name: String,
    n_inputs: usize,
    n_outputs: usize,
    f: Arc<NativeEval>,
}

impl NativeFn {
    pub fn new(
        name: impl Into<String>,
        n_inputs: usize,
        n_outputs: usize,
        f: impl Fn(&Bits) -> Bits + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), n_inputs, n_outputs, f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for NativeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NativeFn({}: {} -> {})", self.name, self.n_inputs, self.n_outputs)
    }
}

impl BoolFunction for NativeFn {
    fn n_inputs(&self) -> usize {
        self.n_inputs
    }
    fn n_outputs(&self) -> usize {
        self.n_outputs
    }
    fn eval_unchecked(&self, x: &Bits) -> Bits {
        let y = (self.f)(x);
        debug_assert_eq!(y.len(), self.n_outputs, "native function {} output arity", self.name);
        y
    }
}

/// Named functions: circuits and native evaluators side by side.
#[derive(Clone, Default)]
pub struct Registry {
    entries: BTreeMap<String, Arc<dyn BoolFunction>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builtins referenced by name from the CLI and the tests.
    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.insert("and2", builders::and2());
        r.insert("xor2", builders::xor2());
        r.insert("or2", builders::or2());
        r.insert("adder4", builders::ripple_adder(4));
        r.insert("lt4", builders::less_than(4));
        r.insert("parity8", builders::parity(8));
        r.insert("identity8", builders::identity(8));
        r
    }

    pub fn insert(&mut self, name: &str, f: impl BoolFunction + 'static) {
        self.entries.insert(name.to_string(), Arc::new(f));
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn BoolFunction>, CircuitError> {
        self.entries.get(name).cloned().ok_or_else(|| CircuitError::Unknown(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn native_and_circuit_share_interface() {
        let r = Registry::with_builtins();
        let f = r.get("and2").unwrap();
        assert!(f.circuit().is_some());
        assert_eq!(f.eval(&Bits::parse("11").unwrap()).unwrap().to_string(), "1");
        assert!(f.eval(&Bits::parse("111").unwrap()).is_err());

        let n = NativeFn::new("dup", 1, 2, |x: &Bits| Bits::concat([x, x]));
        assert!(n.circuit().is_none());
        assert_eq!(n.eval(&Bits::parse("1").unwrap()).unwrap().to_string(), "11");
        assert!(matches!(r.get("nope"), Err(CircuitError::Unknown(_))));
    }
}
