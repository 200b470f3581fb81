//! Name-keyed registry of interchangeable strategies (samplers, solver
//! configurations, makespan objectives).

use std::fmt;
use std::sync::Arc;

pub struct Registry<T: ?Sized> {
    entries: Vec<(&'static str, Arc<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    /// Registers `item` under `name`, replacing any previous entry of that name.
    pub fn register(&mut self, name: &'static str, item: Arc<T>) -> &mut Self {
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = item,
            None => self.entries.push((name, item)),
        }
        self
    }

    /// Case-insensitive lookup.
    pub fn get(&self, name: &str) -> Option<Arc<T>> {
        self.entries
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name.trim()))
            .map(|(_, item)| Arc::clone(item))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<T: ?Sized> Default for Registry<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: ?Sized> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter: Send + Sync {
        fn greet(&self) -> String;
    }
    struct Hello;
    impl Greeter for Hello {
        fn greet(&self) -> String {
            "hello".into()
        }
    }
    struct Hi;
    impl Greeter for Hi {
        fn greet(&self) -> String {
            "hi".into()
        }
    }

    #[test]
    fn lookup_and_replace() {
        let mut reg: Registry<dyn Greeter> = Registry::new();
        reg.register("hello", Arc::new(Hello)).register("hi", Arc::new(Hi));
        assert_eq!(reg.names(), vec!["hello", "hi"]);
        assert_eq!(reg.get("HELLO").unwrap().greet(), "hello");
        assert!(reg.get("hey").is_none());
        reg.register("hello", Arc::new(Hi));
        assert_eq!(reg.len(), 2);
        assert_eq!(reg.get("hello").unwrap().greet(), "hi");
    }
}
