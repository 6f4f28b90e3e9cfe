use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("universe must have at least two elements, got {0}")]
    UniverseTooSmall(usize),
    #[error("element {element} out of range for universe of size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("tuple of length {got} given for `{symbol}` of arity {arity}")]
    ArityMismatch { symbol: String, arity: usize, got: usize },
    #[error("function `{symbol}` is not total: missing value at {args:?}")]
    PartialFunction { symbol: String, args: Vec<usize> },
    #[error("function `{symbol}` given two values at {args:?}")]
    ConflictingFunctionValue { symbol: String, args: Vec<usize> },
    #[error("table for `{symbol}` would need {cells} cells")]
    TableTooLarge { symbol: String, cells: usize },
}

pub const MAX_TABLE_CELLS: usize = 1 << 22;

/// Relation, function and constant symbols of a first-order language.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: Vec<(String, usize)>,
    functions: Vec<(String, usize)>,
    constants: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Relation(usize),
    Function(usize),
    Constant,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure_fresh(&self, name: &str) -> Result<(), StructureError> {
        if self.kind_of(name).is_some() {
            Err(StructureError::DuplicateSymbol(name.to_string()))
        } else {
            Ok(())
        }
    }

    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<(), StructureError> {
        self.ensure_fresh(name)?;
        self.relations.push((name.to_string(), arity));
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, arity: usize) -> Result<(), StructureError> {
        self.ensure_fresh(name)?;
        self.functions.push((name.to_string(), arity));
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str) -> Result<(), StructureError> {
        self.ensure_fresh(name)?;
        self.constants.push(name.to_string());
        Ok(())
    }

    pub fn with_relation(mut self, name: &str, arity: usize) -> Self {
        self.add_relation(name, arity).expect("fresh relation symbol");
        self
    }

    pub fn kind_of(&self, name: &str) -> Option<SymbolKind> {
        if let Some((_, a)) = self.relations.iter().find(|(n, _)| n == name) {
            return Some(SymbolKind::Relation(*a));
        }
        if let Some((_, a)) = self.functions.iter().find(|(n, _)| n == name) {
            return Some(SymbolKind::Function(*a));
        }
        if self.constants.iter().any(|c| c == name) {
            return Some(SymbolKind::Constant);
        }
        None
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn functions(&self) -> &[(String, usize)] {
        &self.functions
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|(n, _)| n == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|(n, _)| n == name)
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c == name)
    }
}

/// Mixed-radix index of `tuple` with the first coordinate most significant,
/// so increasing indices enumerate tuples in lexicographic order.
pub fn tuple_index(size: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * size + e)
}

/// Inverse of [`tuple_index`].
pub fn tuple_at(size: usize, arity: usize, mut index: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = index % size;
        index /= size;
    }
    out
}

fn table_cells(symbol: &str, size: usize, arity: usize) -> Result<usize, StructureError> {
    let mut cells: usize = 1;
    for _ in 0..arity {
        cells = cells
            .checked_mul(size)
            .filter(|c| *c <= MAX_TABLE_CELLS)
            .ok_or_else(|| StructureError::TableTooLarge {
                symbol: symbol.to_string(),
                cells: usize::MAX,
            })?;
    }
    Ok(cells)
}

/// A finite structure with universe `0..size`. Relation and function tables
/// are stored densely, indexed by [`tuple_index`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinStructure {
    name: String,
    signature: Signature,
    size: usize,
    relations: Vec<Vec<bool>>,
    functions: Vec<Vec<usize>>,
    constants: Vec<usize>,
}

impl FinStructure {
    pub fn builder(name: &str, size: usize) -> StructureBuilder {
        StructureBuilder {
            name: name.to_string(),
            size,
            relations: Vec::new(),
            functions: Vec::new(),
            constants: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn universe(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    pub fn holds(&self, relation: usize, args: &[usize]) -> bool {
        self.relations[relation][tuple_index(self.size, args)]
    }

    pub fn apply(&self, function: usize, args: &[usize]) -> usize {
        self.functions[function][tuple_index(self.size, args)]
    }

    pub fn constant(&self, index: usize) -> usize {
        self.constants[index]
    }

    pub fn relation_table(&self, relation: usize) -> &[bool] {
        &self.relations[relation]
    }

    pub fn function_table(&self, function: usize) -> &[usize] {
        &self.functions[function]
    }

    pub fn constant_values(&self) -> &[usize] {
        &self.constants
    }

    /// The tuples in a relation, in lexicographic order.
    pub fn relation_tuples(&self, relation: usize) -> Vec<Vec<usize>> {
        let arity = self.signature.relations[relation].1;
        self.relations[relation]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| tuple_at(self.size, arity, i))
            .collect()
    }

    /// Same structure under another name.
    pub fn renamed(&self, name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..self.clone()
        }
    }
}

impl fmt::Display for FinStructure {
    /// Renders in the structure file syntax understood by [`crate::logic::parse_structure`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "structure {} {{ universe = {};", self.name, self.size)?;
        for (i, (name, arity)) in self.signature.relations.iter().enumerate() {
            let tuples: Vec<String> = self
                .relation_tuples(i)
                .iter()
                .map(|t| format!("({})", join(t)))
                .collect();
            write!(f, " relation {name}/{arity} = {{{}}};", tuples.join(","))?;
        }
        for (i, (name, arity)) in self.signature.functions.iter().enumerate() {
            let cells = self.functions[i].len();
            let entries: Vec<String> = (0..cells)
                .map(|c| {
                    format!(
                        "({})->{}",
                        join(&tuple_at(self.size, *arity, c)),
                        self.functions[i][c]
                    )
                })
                .collect();
            write!(f, " function {name}/{arity} = {{{}}};", entries.join(","))?;
        }
        for (name, value) in self.signature.constants.iter().zip(&self.constants) {
            write!(f, " constant {name} = {value};")?;
        }
        write!(f, " }}")
    }
}

fn join(t: &[usize]) -> String {
    t.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
}

pub struct StructureBuilder {
    name: String,
    size: usize,
    relations: Vec<(String, usize, Vec<Vec<usize>>)>,
    functions: Vec<(String, usize, Vec<(Vec<usize>, usize)>)>,
    constants: Vec<(String, usize)>,
}

impl StructureBuilder {
    pub fn relation(mut self, name: &str, arity: usize, tuples: Vec<Vec<usize>>) -> Self {
        self.relations.push((name.to_string(), arity, tuples));
        self
    }

    pub fn function(mut self, name: &str, arity: usize, graph: Vec<(Vec<usize>, usize)>) -> Self {
        self.functions.push((name.to_string(), arity, graph));
        self
    }

    /// Unary function given by its value list.
    pub fn unary_function(self, name: &str, values: &[usize]) -> Self {
        let graph = values.iter().enumerate().map(|(a, &v)| (vec![a], v)).collect();
        self.function(name, 1, graph)
    }

    pub fn constant(mut self, name: &str, value: usize) -> Self {
        self.constants.push((name.to_string(), value));
        self
    }

    pub fn build(self) -> Result<FinStructure, StructureError> {
        let size = self.size;
        if size < 2 {
            return Err(StructureError::UniverseTooSmall(size));
        }
        let in_range = |e: usize| {
            if e < size {
                Ok(())
            } else {
                Err(StructureError::ElementOutOfRange { element: e, size })
            }
        };
        let mut signature = Signature::new();
        let mut relations = Vec::new();
        for (name, arity, tuples) in &self.relations {
            signature.add_relation(name, *arity)?;
            let mut table = vec![false; table_cells(name, size, *arity)?];
            for t in tuples {
                if t.len() != *arity {
                    return Err(StructureError::ArityMismatch {
                        symbol: name.clone(),
                        arity: *arity,
                        got: t.len(),
                    });
                }
                for &e in t {
                    in_range(e)?;
                }
                table[tuple_index(size, t)] = true;
            }
            relations.push(table);
        }
        let mut functions = Vec::new();
        for (name, arity, graph) in &self.functions {
            signature.add_function(name, *arity)?;
            let mut table: Vec<Option<usize>> = vec![None; table_cells(name, size, *arity)?];
            for (args, v) in graph {
                if args.len() != *arity {
                    return Err(StructureError::ArityMismatch {
                        symbol: name.clone(),
                        arity: *arity,
                        got: args.len(),
                    });
                }
                for &e in args {
                    in_range(e)?;
                }
                in_range(*v)?;
                let slot = &mut table[tuple_index(size, args)];
                match slot {
                    Some(old) if old != v => {
                        return Err(StructureError::ConflictingFunctionValue {
                            symbol: name.clone(),
                            args: args.clone(),
                        })
                    }
                    _ => *slot = Some(*v),
                }
            }
            let total: Result<Vec<usize>, _> = table
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.ok_or_else(|| StructureError::PartialFunction {
                        symbol: name.clone(),
                        args: tuple_at(size, *arity, i),
                    })
                })
                .collect();
            functions.push(total?);
        }
        let mut constants = Vec::new();
        for (name, v) in &self.constants {
            signature.add_constant(name)?;
            in_range(*v)?;
            constants.push(*v);
        }
        Ok(FinStructure {
            name: self.name,
            signature,
            size,
            relations,
            functions,
            constants,
        })
    }
}
