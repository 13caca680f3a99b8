use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::result::{KernelKind, LabelOrder};
use super::CorrelatorError;
use crate::algebra::Statistics;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Charge {
    Neutral,
    Charged,
}

/// Species metadata for one para field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub name: String,
    pub stat: Statistics,
    pub charge: Charge,
}

impl FieldSpec {
    pub fn new(name: impl Into<String>, stat: Statistics, charge: Charge) -> Self {
        FieldSpec {
            name: name.into(),
            stat,
            charge,
        }
    }

    pub fn kernel(&self) -> KernelKind {
        match self.stat {
            Statistics::ParaBose => KernelKind::ScalarFeynman,
            Statistics::ParaFermi => KernelKind::FermionFeynman,
        }
    }

    /// Contractions must join a field with its adjoint. True for charged fields
    /// and for every parafermi field.
    pub fn pairs_with_adjoint(&self) -> bool {
        self.charge == Charge::Charged || self.stat == Statistics::ParaFermi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    TimeOrderedField,
    Annihilator,
    Creator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    TimeOrdered,
    OperatorString,
}

/// One factor of the product. `field` indexes into the owning
/// [`ProductSpec::fields`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Insertion {
    pub field: usize,
    pub adjoint: bool,
    pub label: String,
    pub op_kind: OpKind,
}

impl Insertion {
    pub fn field(field: usize, adjoint: bool, label: impl Into<String>) -> Self {
        Insertion {
            field,
            adjoint,
            label: label.into(),
            op_kind: OpKind::TimeOrderedField,
        }
    }

    pub fn annihilator(field: usize, mode: impl Into<String>) -> Self {
        Insertion {
            field,
            adjoint: false,
            label: mode.into(),
            op_kind: OpKind::Annihilator,
        }
    }

    pub fn creator(field: usize, mode: impl Into<String>) -> Self {
        Insertion {
            field,
            adjoint: true,
            label: mode.into(),
            op_kind: OpKind::Creator,
        }
    }
}

/// Exchange signs between Green components of two distinct fields, keyed by
/// the unordered pair of field names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelativeRules {
    overrides: BTreeMap<(String, String), (i32, i32)>,
    use_defaults: bool,
}

impl Default for RelativeRules {
    fn default() -> Self {
        RelativeRules {
            overrides: BTreeMap::new(),
            use_defaults: true,
        }
    }
}

impl RelativeRules {
    /// Only explicit entries; a crossing between fields without an entry is an error.
    pub fn explicit_only() -> Self {
        RelativeRules {
            overrides: BTreeMap::new(),
            use_defaults: false,
        }
    }

    pub fn set(
        &mut self,
        a: &str,
        b: &str,
        same_index: i32,
        different_index: i32,
    ) -> Result<(), CorrelatorError> {
        for s in [same_index, different_index] {
            if s != 1 && s != -1 {
                return Err(CorrelatorError::BadRuleSign(same_index, different_index));
            }
        }
        self.overrides
            .insert(Self::key(a, b), (same_index, different_index));
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(String, String), &(i32, i32))> {
        self.overrides.iter()
    }

    pub fn uses_defaults(&self) -> bool {
        self.use_defaults
    }

    fn key(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    }

    /// `(same_index_sign, different_index_sign)` for two distinct fields.
    pub fn lookup(&self, a: &FieldSpec, b: &FieldSpec) -> Option<(i32, i32)> {
        if let Some(&rule) = self.overrides.get(&Self::key(&a.name, &b.name)) {
            return Some(rule);
        }
        if !self.use_defaults {
            return None;
        }
        let stat = if a.stat == Statistics::ParaFermi && b.stat == Statistics::ParaFermi {
            Statistics::ParaFermi
        } else {
            Statistics::ParaBose
        };
        Some((stat.exchange_sign(true), stat.exchange_sign(false)))
    }
}

/// Resolved exchange signs between every pair of fields in a problem.
#[derive(Clone, Debug)]
pub struct SignTable {
    names: Vec<String>,
    rules: Vec<Vec<Option<(i32, i32)>>>,
}

impl SignTable {
    /// One field with the given statistics; every graph vertex is field 0.
    pub fn uniform(stat: Statistics) -> Self {
        SignTable {
            names: vec!["_".into()],
            rules: vec![vec![Some((
                stat.exchange_sign(true),
                stat.exchange_sign(false),
            ))]],
        }
    }

    pub fn new(fields: &[FieldSpec], relative: &RelativeRules) -> Self {
        let rules = fields
            .iter()
            .enumerate()
            .map(|(i, a)| {
                fields
                    .iter()
                    .enumerate()
                    .map(|(j, b)| {
                        if i == j {
                            Some((a.stat.exchange_sign(true), a.stat.exchange_sign(false)))
                        } else {
                            relative.lookup(a, b)
                        }
                    })
                    .collect()
            })
            .collect();
        SignTable {
            names: fields.iter().map(|f| f.name.clone()).collect(),
            rules,
        }
    }

    pub fn pair(&self, f: usize, g: usize) -> Result<(i32, i32), CorrelatorError> {
        self.rules[f][g].ok_or_else(|| {
            CorrelatorError::MissingRelativeRule(self.names[f].clone(), self.names[g].clone())
        })
    }

    pub fn sign(&self, f: usize, g: usize, same_index: bool) -> Result<i32, CorrelatorError> {
        let (same, diff) = self.pair(f, g)?;
        Ok(if same_index { same } else { diff })
    }
}

/// An ordered product of insertions whose vacuum expectation value is wanted.
/// Position 0 is the leftmost factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSpec {
    fields: Vec<FieldSpec>,
    insertions: Vec<Insertion>,
    mode: Mode,
    relative_rules: RelativeRules,
}

impl ProductSpec {
    pub fn new(
        fields: Vec<FieldSpec>,
        insertions: Vec<Insertion>,
        mode: Mode,
        relative_rules: RelativeRules,
    ) -> Result<Self, CorrelatorError> {
        let mut names = BTreeSet::new();
        for f in &fields {
            if !names.insert(f.name.as_str()) {
                return Err(CorrelatorError::DuplicateField(f.name.clone()));
            }
        }
        for (position, ins) in insertions.iter().enumerate() {
            if ins.field >= fields.len() {
                return Err(CorrelatorError::UnknownField {
                    position,
                    field: ins.field,
                });
            }
            let ok = match mode {
                Mode::TimeOrdered => ins.op_kind == OpKind::TimeOrderedField,
                Mode::OperatorString => ins.op_kind != OpKind::TimeOrderedField,
            };
            if !ok {
                return Err(CorrelatorError::ModeMismatch {
                    position,
                    kind: ins.op_kind,
                    mode,
                });
            }
        }
        Ok(ProductSpec {
            fields,
            insertions,
            mode,
            relative_rules,
        })
    }

    pub fn time_ordered(
        fields: Vec<FieldSpec>,
        insertions: Vec<Insertion>,
    ) -> Result<Self, CorrelatorError> {
        Self::new(
            fields,
            insertions,
            Mode::TimeOrdered,
            RelativeRules::default(),
        )
    }

    pub fn operator_string(
        field: FieldSpec,
        insertions: Vec<Insertion>,
    ) -> Result<Self, CorrelatorError> {
        Self::new(
            vec![field],
            insertions,
            Mode::OperatorString,
            RelativeRules::default(),
        )
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    pub fn insertions(&self) -> &[Insertion] {
        &self.insertions
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn relative_rules(&self) -> &RelativeRules {
        &self.relative_rules
    }

    pub fn len(&self) -> usize {
        self.insertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.insertions.is_empty()
    }

    pub fn field_of(&self, position: usize) -> &FieldSpec {
        &self.fields[self.insertions[position].field]
    }

    pub fn sign_table(&self) -> Result<SignTable, CorrelatorError> {
        Ok(SignTable::new(&self.fields, &self.relative_rules))
    }

    pub fn label_order(&self) -> LabelOrder {
        LabelOrder::new(self.insertions.iter().map(|i| i.label.as_str()))
    }

    /// Whether positions `i < j` may be contracted.
    pub fn admissible(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.insertions[i], &self.insertions[j]);
        if a.field != b.field {
            return false;
        }
        match self.mode {
            Mode::OperatorString => {
                a.op_kind == OpKind::Annihilator && b.op_kind == OpKind::Creator
            }
            Mode::TimeOrdered => {
                !self.fields[a.field].pairs_with_adjoint() || a.adjoint != b.adjoint
            }
        }
    }

    /// Same problem with extra insertions appended on the right.
    pub fn extended(&self, extra: impl IntoIterator<Item = Insertion>) -> Self {
        let mut out = self.clone();
        out.insertions.extend(extra);
        out
    }
}
