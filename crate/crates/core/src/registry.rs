//! Name-keyed registries of interchangeable strategies.
//!
//! Threshold schedules, amplitude models and self-test checks are each a
//! trait with several implementations. A [`Registry`] maps a stable name to
//! a factory so configs and the CLI can pick one at runtime.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

type Factory<T, O> = Box<dyn Fn(&O) -> Box<T> + Send + Sync>;

pub struct Registry<T: ?Sized, O = ()> {
    kind: &'static str,
    factories: BTreeMap<&'static str, Factory<T, O>>,
}

impl<T: ?Sized, O> Registry<T, O> {
    /// `kind` names the strategy family in error messages.
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            factories: BTreeMap::new(),
        }
    }

    pub fn register<F>(&mut self, name: &'static str, factory: F) -> &mut Self
    where
        F: Fn(&O) -> Box<T> + Send + Sync + 'static,
    {
        self.factories.insert(name, Box::new(factory));
        self
    }

    pub fn create(&self, name: &str, options: &O) -> Result<Box<T>> {
        match self.factories.get(name) {
            Some(f) => Ok(f(options)),
            None => Err(Error::Parameter(format!(
                "unknown {} '{name}' (known: {})",
                self.kind,
                self.names().collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    /// Registered names in sorted order.
    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }
}

impl<T: ?Sized, O> fmt::Debug for Registry<T, O> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("names", &self.factories.keys().collect::<Vec<_>>())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter {
        fn greet(&self) -> String;
    }
    struct Hello(u8);
    impl Greeter for Hello {
        fn greet(&self) -> String {
            format!("hello {}", self.0)
        }
    }

    #[test]
    fn create_by_name() {
        let mut reg: Registry<dyn Greeter, u8> = Registry::new("greeter");
        reg.register("hello", |o| Box::new(Hello(*o)));
        assert_eq!(reg.create("hello", &3).unwrap().greet(), "hello 3");
        let err = reg.create("bye", &0).err().unwrap().to_string();
        assert!(err.contains("unknown greeter 'bye'") && err.contains("hello"), "{err}");
        assert_eq!(reg.names().collect::<Vec<_>>(), vec!["hello"]);
    }
}
