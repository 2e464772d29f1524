use std::ops::Range;

use super::QsimError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub width: usize,
}

impl Segment {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.width
    }
}

/// Ordered, contiguous named registers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegisterLayout {
    segments: Vec<Segment>,
    total: usize,
}

impl RegisterLayout {
    pub fn new(segments: &[(&str, usize)]) -> Result<Self, QsimError> {
        let mut l = Self::default();
        for (name, width) in segments {
            l.push(name, *width)?;
        }
        Ok(l)
    }

    /// Single register covering `width` qubits.
    pub fn flat(width: usize) -> Self {
        Self::new(&[("q", width)]).expect("one segment")
    }

    pub fn push(&mut self, name: &str, width: usize) -> Result<(), QsimError> {
        if self.segments.iter().any(|s| s.name == name) {
            return Err(QsimError::Layout(format!("duplicate register {name:?}")));
        }
        self.segments.push(Segment { name: name.to_string(), offset: self.total, width });
        self.total += width;
        Ok(())
    }

    pub fn total_width(&self) -> usize {
        self.total
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, name: &str) -> Result<&Segment, QsimError> {
        self.segments.iter().find(|s| s.name == name).ok_or_else(|| QsimError::UnknownRegister(name.to_string()))
    }

    pub fn range(&self, name: &str) -> Result<Range<usize>, QsimError> {
        Ok(self.segment(name)?.range())
    }

    pub fn width(&self, name: &str) -> Result<usize, QsimError> {
        Ok(self.segment(name)?.width)
    }

    /// Positions covered by `names`, in the order given.
    pub fn positions(&self, names: &[&str]) -> Result<Vec<usize>, QsimError> {
        let mut seen = Vec::new();
        let mut out = Vec::new();
        for n in names {
            if seen.contains(n) {
                return Err(QsimError::Layout(format!("register {n:?} listed twice")));
            }
            seen.push(*n);
            out.extend(self.range(n)?);
        }
        Ok(out)
    }

    /// Layout with `names` removed; remaining registers keep their order.
    pub fn without(&self, names: &[&str]) -> Result<Self, QsimError> {
        for n in names {
            self.segment(n)?;
        }
        let mut l = Self::default();
        for s in &self.segments {
            if !names.contains(&s.name.as_str()) {
                l.push(&s.name, s.width)?;
            }
        }
        Ok(l)
    }
}
