//! A minimal pickle interpreter covering what Planetoid files contain:
//! numpy arrays, scipy CSR matrices and `defaultdict(list)` graphs, written by
//! either Python 2 (protocol 2, byte strings) or Python 3.
//!
//! Objects are never constructed; `REDUCE`, `NEWOBJ` and `BUILD` produce
//! inert [`Value::Object`] records that the accessors below interpret.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

pub type Obj = Rc<RefCell<Value>>;

#[derive(Debug, Clone)]
pub enum Value {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Bytes(Vec<u8>),
    Tuple(Vec<Obj>),
    List(Vec<Obj>),
    Dict(Vec<(Obj, Obj)>),
    Global { module: String, name: String },
    Object { class: Obj, args: Obj, state: Option<Obj> },
    Mark,
}

fn obj(v: Value) -> Obj {
    Rc::new(RefCell::new(v))
}

#[derive(Debug)]
pub struct PickleError(pub String);

type PResult<T> = std::result::Result<T, PickleError>;

fn err<T>(msg: impl Into<String>) -> PResult<T> {
    Err(PickleError(msg.into()))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> PResult<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return err(format!("unexpected end of data at byte {}", self.pos));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> PResult<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> PResult<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> PResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> PResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn line(&mut self) -> PResult<&'a [u8]> {
        let rest = &self.buf[self.pos..];
        match rest.iter().position(|&b| b == b'\n') {
            Some(i) => {
                self.pos += i + 1;
                Ok(&rest[..i])
            }
            None => err("unterminated text opcode"),
        }
    }

    fn text_line(&mut self) -> PResult<String> {
        Ok(String::from_utf8_lossy(self.line()?).into_owned())
    }
}

fn le_signed(bytes: &[u8]) -> PResult<i64> {
    if bytes.is_empty() {
        return Ok(0);
    }
    if bytes.len() > 8 {
        // Accept wider encodings only when they sign-extend an i64.
        let (lo, hi) = bytes.split_at(8);
        let fill = if lo[7] & 0x80 != 0 { 0xff } else { 0 };
        if hi.iter().any(|&b| b != fill) {
            return err("integer wider than 64 bits");
        }
        return le_signed(lo);
    }
    let mut buf = if bytes[bytes.len() - 1] & 0x80 != 0 { [0xffu8; 8] } else { [0u8; 8] };
    buf[..bytes.len()].copy_from_slice(bytes);
    Ok(i64::from_le_bytes(buf))
}

/// Decodes Python's `raw-unicode-escape` (the text `UNICODE` opcode).
fn raw_unicode_escape(bytes: &[u8]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\\' && i + 1 < bytes.len() && (bytes[i + 1] == b'u' || bytes[i + 1] == b'U') {
            let width = if bytes[i + 1] == b'u' { 4 } else { 8 };
            if let Some(hex) = bytes.get(i + 2..i + 2 + width) {
                if let Some(c) = std::str::from_utf8(hex).ok().and_then(|h| u32::from_str_radix(h, 16).ok()).and_then(char::from_u32) {
                    out.push(c);
                    i += 2 + width;
                    continue;
                }
            }
        }
        out.push(bytes[i] as char);
        i += 1;
    }
    out
}

/// Parses a Python 2 quoted string literal as written by the `STRING` opcode.
fn quoted_string(line: &[u8]) -> PResult<Vec<u8>> {
    let n = line.len();
    if n < 2 || line[0] != line[n - 1] || !(line[0] == b'\'' || line[0] == b'"') {
        return err("malformed STRING literal");
    }
    let body = &line[1..n - 1];
    let mut out = Vec::with_capacity(body.len());
    let mut i = 0;
    while i < body.len() {
        if body[i] != b'\\' {
            out.push(body[i]);
            i += 1;
            continue;
        }
        i += 1;
        let Some(&c) = body.get(i) else { return err("dangling escape in STRING literal") };
        i += 1;
        match c {
            b'n' => out.push(b'\n'),
            b't' => out.push(b'\t'),
            b'r' => out.push(b'\r'),
            b'\\' | b'\'' | b'"' => out.push(c),
            b'x' => {
                let hex = body.get(i..i + 2).ok_or_else(|| PickleError("short \\x escape".into()))?;
                let s = std::str::from_utf8(hex).map_err(|_| PickleError("bad \\x escape".into()))?;
                out.push(u8::from_str_radix(s, 16).map_err(|_| PickleError("bad \\x escape".into()))?);
                i += 2;
            }
            d @ b'0'..=b'7' => {
                let mut v = (d - b'0') as u32;
                for _ in 0..2 {
                    match body.get(i) {
                        Some(&o @ b'0'..=b'7') => {
                            v = v * 8 + (o - b'0') as u32;
                            i += 1;
                        }
                        _ => break,
                    }
                }
                out.push(v as u8);
            }
            other => {
                out.push(b'\\');
                out.push(other);
            }
        }
    }
    Ok(out)
}

struct Machine {
    stack: Vec<Obj>,
    memo: HashMap<u32, Obj>,
}

impl Machine {
    fn push(&mut self, v: Value) {
        self.stack.push(obj(v));
    }

    fn pop(&mut self) -> PResult<Obj> {
        self.stack.pop().ok_or_else(|| PickleError("stack underflow".into()))
    }

    fn top(&self) -> PResult<Obj> {
        self.stack.last().cloned().ok_or_else(|| PickleError("stack underflow".into()))
    }

    fn pop_mark(&mut self) -> PResult<Vec<Obj>> {
        let pos = self
            .stack
            .iter()
            .rposition(|o| matches!(*o.borrow(), Value::Mark))
            .ok_or_else(|| PickleError("mark not found".into()))?;
        let items = self.stack.split_off(pos + 1);
        self.stack.pop();
        Ok(items)
    }

    fn memo_get(&self, key: u32) -> PResult<Obj> {
        self.memo.get(&key).cloned().ok_or_else(|| PickleError(format!("memo key {key} missing")))
    }

    fn memo_put(&mut self, key: u32) -> PResult<()> {
        let top = self.top()?;
        self.memo.insert(key, top);
        Ok(())
    }
}

fn append_all(target: &Obj, items: Vec<Obj>) -> PResult<()> {
    match &mut *target.borrow_mut() {
        Value::List(l) => {
            l.extend(items);
            Ok(())
        }
        // set-like objects (EMPTY_SET / ADDITEMS) and list subclasses
        Value::Object { state, .. } => {
            let s = state.get_or_insert_with(|| obj(Value::List(Vec::new())));
            match &mut *s.borrow_mut() {
                Value::List(l) => {
                    l.extend(items);
                    Ok(())
                }
                _ => err("APPEND to object with non-list state"),
            }
        }
        _ => err("APPEND target is not a list"),
    }
}

fn set_items(target: &Obj, items: Vec<Obj>) -> PResult<()> {
    if items.len() % 2 != 0 {
        return err("SETITEMS with odd item count");
    }
    match &mut *target.borrow_mut() {
        Value::Dict(d) => {
            let mut it = items.into_iter();
            while let (Some(k), Some(v)) = (it.next(), it.next()) {
                d.push((k, v));
            }
            Ok(())
        }
        _ => err("SETITEM target is not a dict"),
    }
}

/// Applies the few callables whose result matters structurally; everything
/// else becomes an inert object.
fn reduce(callable: Obj, args: Obj) -> PResult<Value> {
    let (module, name) = match &*callable.borrow() {
        Value::Global { module, name } => (module.clone(), name.clone()),
        _ => return Ok(Value::Object { class: callable.clone(), args, state: None }),
    };
    match (module.as_str(), name.as_str()) {
        ("_codecs", "encode") => {
            let a = args.borrow();
            let Value::Tuple(items) = &*a else { return err("_codecs.encode without tuple args") };
            let Some(Value::Str(s)) = items.first().map(|o| o.borrow().clone()) else {
                return err("_codecs.encode on non-string");
            };
            // latin-1 maps code points 0..=255 straight to bytes
            let bytes = s
                .chars()
                .map(|c| u8::try_from(c as u32).map_err(|_| PickleError("non-latin-1 character".into())))
                .collect::<PResult<Vec<u8>>>()?;
            Ok(Value::Bytes(bytes))
        }
        ("collections", "defaultdict") => Ok(Value::Dict(Vec::new())),
        ("__builtin__" | "builtins", "set" | "frozenset" | "list") => {
            let a = args.borrow();
            let items = match &*a {
                Value::Tuple(t) if t.is_empty() => Vec::new(),
                Value::Tuple(t) => match &*t[0].borrow() {
                    Value::List(l) | Value::Tuple(l) => l.clone(),
                    _ => return err(format!("{name}() of unsupported argument")),
                },
                _ => return err(format!("{name}() without tuple args")),
            };
            Ok(Value::List(items))
        }
        _ => Ok(Value::Object { class: callable.clone(), args, state: None }),
    }
}

/// Runs a pickle stream to its `STOP` opcode.
pub fn load(data: &[u8]) -> PResult<Obj> {
    let mut r = Reader { buf: data, pos: 0 };
    let mut m = Machine { stack: Vec::new(), memo: HashMap::new() };
    loop {
        let op = r.u8()?;
        match op {
            0x80 => {
                let proto = r.u8()?;
                if proto > 5 {
                    return err(format!("unsupported pickle protocol {proto}"));
                }
            }
            0x95 => {
                r.u64()?;
            }
            b'.' => return m.pop(),
            b'(' => m.push(Value::Mark),
            b'0' => {
                m.pop()?;
            }
            b'1' => {
                m.pop_mark()?;
            }
            b'2' => {
                let t = m.top()?;
                m.stack.push(t);
            }
            b'N' => m.push(Value::None),
            0x88 => m.push(Value::Bool(true)),
            0x89 => m.push(Value::Bool(false)),
            b'J' => {
                let v = r.u32()? as i32;
                m.push(Value::Int(v as i64));
            }
            b'K' => {
                let v = r.u8()?;
                m.push(Value::Int(v as i64));
            }
            b'M' => {
                let v = r.u16()?;
                m.push(Value::Int(v as i64));
            }
            0x8a => {
                let n = r.u8()? as usize;
                let v = le_signed(r.take(n)?)?;
                m.push(Value::Int(v));
            }
            0x8b => {
                let n = r.u32()? as usize;
                let v = le_signed(r.take(n)?)?;
                m.push(Value::Int(v));
            }
            b'I' => {
                let s = r.text_line()?;
                let v = match s.as_str() {
                    "00" => Value::Bool(false),
                    "01" => Value::Bool(true),
                    t => Value::Int(t.trim().parse().map_err(|_| PickleError(format!("bad INT {t:?}")))?),
                };
                m.push(v);
            }
            b'L' => {
                let s = r.text_line()?;
                let t = s.trim().trim_end_matches('L');
                m.push(Value::Int(t.parse().map_err(|_| PickleError(format!("bad LONG {s:?}")))?));
            }
            b'G' => {
                let v = f64::from_be_bytes(r.take(8)?.try_into().unwrap());
                m.push(Value::Float(v));
            }
            b'F' => {
                let s = r.text_line()?;
                m.push(Value::Float(s.trim().parse().map_err(|_| PickleError(format!("bad FLOAT {s:?}")))?));
            }
            b'T' => {
                let n = r.u32()? as usize;
                m.push(Value::Bytes(r.take(n)?.to_vec()));
            }
            b'U' => {
                let n = r.u8()? as usize;
                m.push(Value::Bytes(r.take(n)?.to_vec()));
            }
            b'S' => {
                let line = r.line()?;
                m.push(Value::Bytes(quoted_string(line)?));
            }
            b'B' => {
                let n = r.u32()? as usize;
                m.push(Value::Bytes(r.take(n)?.to_vec()));
            }
            b'C' => {
                let n = r.u8()? as usize;
                m.push(Value::Bytes(r.take(n)?.to_vec()));
            }
            0x8e | 0x96 => {
                let n = r.u64()? as usize;
                m.push(Value::Bytes(r.take(n)?.to_vec()));
            }
            b'X' => {
                let n = r.u32()? as usize;
                m.push(Value::Str(String::from_utf8_lossy(r.take(n)?).into_owned()));
            }
            0x8c => {
                let n = r.u8()? as usize;
                m.push(Value::Str(String::from_utf8_lossy(r.take(n)?).into_owned()));
            }
            0x8d => {
                let n = r.u64()? as usize;
                m.push(Value::Str(String::from_utf8_lossy(r.take(n)?).into_owned()));
            }
            b'V' => {
                let line = r.line()?;
                m.push(Value::Str(raw_unicode_escape(line)));
            }
            b')' => m.push(Value::Tuple(Vec::new())),
            b't' => {
                let items = m.pop_mark()?;
                m.push(Value::Tuple(items));
            }
            0x85..=0x87 => {
                let n = (op - 0x84) as usize;
                if m.stack.len() < n {
                    return err("stack underflow in TUPLEn");
                }
                let items = m.stack.split_off(m.stack.len() - n);
                m.push(Value::Tuple(items));
            }
            b']' => m.push(Value::List(Vec::new())),
            b'l' => {
                let items = m.pop_mark()?;
                m.push(Value::List(items));
            }
            b'a' => {
                let v = m.pop()?;
                append_all(&m.top()?, vec![v])?;
            }
            b'e' => {
                let items = m.pop_mark()?;
                append_all(&m.top()?, items)?;
            }
            b'}' => m.push(Value::Dict(Vec::new())),
            b'd' => {
                let items = m.pop_mark()?;
                m.push(Value::Dict(Vec::new()));
                set_items(&m.top()?, items)?;
            }
            b's' => {
                let v = m.pop()?;
                let k = m.pop()?;
                set_items(&m.top()?, vec![k, v])?;
            }
            b'u' => {
                let items = m.pop_mark()?;
                set_items(&m.top()?, items)?;
            }
            0x8f => m.push(Value::List(Vec::new())),
            0x90 => {
                let items = m.pop_mark()?;
                append_all(&m.top()?, items)?;
            }
            0x91 => {
                let items = m.pop_mark()?;
                m.push(Value::List(items));
            }
            b'c' => {
                let module = r.text_line()?;
                let name = r.text_line()?;
                m.push(Value::Global { module, name });
            }
            0x93 => {
                let name = m.pop()?;
                let module = m.pop()?;
                let (Some(module), Some(name)) = (as_text(&module), as_text(&name)) else {
                    return err("STACK_GLOBAL with non-string operands");
                };
                m.push(Value::Global { module, name });
            }
            b'R' => {
                let args = m.pop()?;
                let callable = m.pop()?;
                let v = reduce(callable, args)?;
                m.push(v);
            }
            0x81 => {
                let args = m.pop()?;
                let class = m.pop()?;
                let v = reduce(class, args)?;
                m.push(v);
            }
            0x92 => {
                let _kwargs = m.pop()?;
                let args = m.pop()?;
                let class = m.pop()?;
                let v = reduce(class, args)?;
                m.push(v);
            }
            b'o' => {
                let mut items = m.pop_mark()?;
                if items.is_empty() {
                    return err("OBJ without class");
                }
                let class = items.remove(0);
                m.push(Value::Object { class, args: obj(Value::Tuple(items)), state: None });
            }
            b'i' => {
                let module = r.text_line()?;
                let name = r.text_line()?;
                let items = m.pop_mark()?;
                let class = obj(Value::Global { module, name });
                m.push(Value::Object { class, args: obj(Value::Tuple(items)), state: None });
            }
            b'b' => {
                let st = m.pop()?;
                let target = m.top()?;
                let mut t = target.borrow_mut();
                match &mut *t {
                    Value::Object { state, .. } => *state = Some(st),
                    // dict subclasses (defaultdict) may carry a state dict
                    Value::Dict(_) => {}
                    _ => return err("BUILD on a non-object"),
                }
            }
            b'p' => {
                let s = r.text_line()?;
                let key = s.trim().parse().map_err(|_| PickleError(format!("bad PUT {s:?}")))?;
                m.memo_put(key)?;
            }
            b'q' => {
                let key = r.u8()? as u32;
                m.memo_put(key)?;
            }
            b'r' => {
                let key = r.u32()?;
                m.memo_put(key)?;
            }
            0x94 => {
                let key = m.memo.len() as u32;
                m.memo_put(key)?;
            }
            b'g' => {
                let s = r.text_line()?;
                let key = s.trim().parse().map_err(|_| PickleError(format!("bad GET {s:?}")))?;
                let v = m.memo_get(key)?;
                m.stack.push(v);
            }
            b'h' => {
                let key = r.u8()? as u32;
                let v = m.memo_get(key)?;
                m.stack.push(v);
            }
            b'j' => {
                let key = r.u32()?;
                let v = m.memo_get(key)?;
                m.stack.push(v);
            }
            other => return err(format!("unsupported opcode 0x{other:02x} at byte {}", r.pos - 1)),
        }
    }
}

/// Text of a `str` (Python 3) or latin-1 byte string (Python 2).
pub fn as_text(o: &Obj) -> Option<String> {
    match &*o.borrow() {
        Value::Str(s) => Some(s.clone()),
        Value::Bytes(b) => Some(b.iter().map(|&c| c as char).collect()),
        _ => None,
    }
}

pub fn as_int(o: &Obj) -> Option<i64> {
    match &*o.borrow() {
        Value::Int(i) => Some(*i),
        Value::Bool(b) => Some(*b as i64),
        _ => None,
    }
}

fn global_name(o: &Obj) -> Option<(String, String)> {
    match &*o.borrow() {
        Value::Global { module, name } => Some((module.clone(), name.clone())),
        _ => None,
    }
}

fn tuple_items(o: &Obj) -> Option<Vec<Obj>> {
    match &*o.borrow() {
        Value::Tuple(t) | Value::List(t) => Some(t.clone()),
        _ => None,
    }
}

/// Looks up a string key in a dict value.
pub fn dict_get(o: &Obj, key: &str) -> Option<Obj> {
    match &*o.borrow() {
        Value::Dict(d) => d.iter().find(|(k, _)| as_text(k).as_deref() == Some(key)).map(|(_, v)| v.clone()),
        _ => None,
    }
}

/// A decoded numeric numpy array, flattened in C order.
#[derive(Debug, Clone, PartialEq)]
pub struct NdArray {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

fn decode_dtype(dtype: &Obj) -> PResult<(u8, usize, bool)> {
    let d = dtype.borrow();
    let Value::Object { args, state, .. } = &*d else { return err("dtype is not an object") };
    let code = tuple_items(args).and_then(|a| a.first().and_then(as_text)).ok_or_else(|| PickleError("dtype without type code".into()))?;
    let kind = code.as_bytes().first().copied().ok_or_else(|| PickleError("empty dtype code".into()))?;
    let size: usize = code[1..].parse().map_err(|_| PickleError(format!("unsupported dtype {code:?}")))?;
    let order = state
        .as_ref()
        .and_then(tuple_items)
        .and_then(|s| s.get(1).and_then(as_text))
        .unwrap_or_else(|| "|".into());
    Ok((kind, size, order == ">"))
}

fn decode_scalar(kind: u8, size: usize, big: bool, raw: &[u8]) -> PResult<f64> {
    let mut b = raw.to_vec();
    if big {
        b.reverse();
    }
    Ok(match (kind, size) {
        (b'f', 8) => f64::from_le_bytes(b.try_into().unwrap()),
        (b'f', 4) => f32::from_le_bytes(b.try_into().unwrap()) as f64,
        (b'i', 1) => b[0] as i8 as f64,
        (b'i', 2) => i16::from_le_bytes(b.try_into().unwrap()) as f64,
        (b'i', 4) => i32::from_le_bytes(b.try_into().unwrap()) as f64,
        (b'i', 8) => i64::from_le_bytes(b.try_into().unwrap()) as f64,
        (b'u' | b'b', 1) => b[0] as f64,
        (b'u', 2) => u16::from_le_bytes(b.try_into().unwrap()) as f64,
        (b'u', 4) => u32::from_le_bytes(b.try_into().unwrap()) as f64,
        (b'u', 8) => u64::from_le_bytes(b.try_into().unwrap()) as f64,
        _ => return err(format!("unsupported dtype {}{}", kind as char, size)),
    })
}

/// Interprets an `ndarray` produced by `numpy.core.multiarray._reconstruct`.
pub fn as_ndarray(o: &Obj) -> PResult<NdArray> {
    let v = o.borrow();
    let Value::Object { class, state, .. } = &*v else { return err("expected a numpy array object") };
    match global_name(class) {
        Some((m, n)) if m.ends_with("multiarray") && n == "_reconstruct" => {}
        other => return err(format!("expected numpy _reconstruct, found {other:?}")),
    }
    let state = state.as_ref().and_then(tuple_items).ok_or_else(|| PickleError("array without state".into()))?;
    if state.len() != 5 {
        return err(format!("array state has {} fields, expected 5", state.len()));
    }
    let shape = tuple_items(&state[1])
        .ok_or_else(|| PickleError("array shape is not a tuple".into()))?
        .iter()
        .map(|d| as_int(d).and_then(|x| usize::try_from(x).ok()))
        .collect::<Option<Vec<usize>>>()
        .ok_or_else(|| PickleError("bad array shape".into()))?;
    let (kind, size, big) = decode_dtype(&state[2])?;
    let fortran = matches!(&*state[3].borrow(), Value::Bool(true) | Value::Int(1));
    let raw = match &*state[4].borrow() {
        Value::Bytes(b) => b.clone(),
        _ => return err("array payload is not a byte string"),
    };
    let count: usize = shape.iter().product();
    if raw.len() != count * size {
        return err(format!("array payload has {} bytes, expected {}", raw.len(), count * size));
    }
    let mut data = raw.chunks_exact(size).map(|c| decode_scalar(kind, size, big, c)).collect::<PResult<Vec<f64>>>()?;
    if fortran && shape.len() == 2 {
        let (r, c) = (shape[0], shape[1]);
        let mut cdata = vec![0.0; data.len()];
        for j in 0..c {
            for i in 0..r {
                cdata[i * c + j] = data[j * r + i];
            }
        }
        data = cdata;
    }
    Ok(NdArray { shape, data })
}

/// A scipy sparse matrix in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

fn index_vec(a: NdArray, what: &str) -> PResult<Vec<usize>> {
    a.data
        .into_iter()
        .map(|x| if x >= 0.0 && x.fract() == 0.0 { Ok(x as usize) } else { err(format!("bad {what} entry {x}")) })
        .collect()
}

/// Interprets a pickled `scipy.sparse` CSR matrix (or its state dict).
pub fn as_csr(o: &Obj) -> PResult<Csr> {
    let state = match &*o.borrow() {
        Value::Object { state: Some(s), .. } => s.clone(),
        Value::Dict(_) => o.clone(),
        _ => return err("expected a scipy sparse matrix"),
    };
    if let Some(f) = dict_get(&state, "format").and_then(|f| as_text(&f)) {
        if f != "csr" {
            return err(format!("sparse format {f:?} is not csr"));
        }
    }
    let shape = dict_get(&state, "_shape")
        .or_else(|| dict_get(&state, "shape"))
        .and_then(|s| tuple_items(&s))
        .ok_or_else(|| PickleError("sparse matrix without shape".into()))?;
    let dims: Vec<usize> = shape.iter().filter_map(|d| as_int(d).and_then(|x| usize::try_from(x).ok())).collect();
    let [rows, cols] = dims[..] else { return err("sparse shape is not 2-D") };
    let field = |name: &str| dict_get(&state, name).ok_or_else(|| PickleError(format!("sparse matrix without {name}")));
    let indptr = index_vec(as_ndarray(&field("indptr")?)?, "indptr")?;
    let indices = index_vec(as_ndarray(&field("indices")?)?, "indices")?;
    let data = as_ndarray(&field("data")?)?.data;
    if indptr.len() != rows + 1 || indptr.last() != Some(&indices.len()) || indices.len() != data.len() {
        return err("inconsistent CSR arrays");
    }
    if indptr.windows(2).any(|w| w[0] > w[1]) || indices.iter().any(|&c| c >= cols) {
        return err("CSR indices out of range");
    }
    Ok(Csr { rows, cols, indptr, indices, data })
}

/// Interprets a dict (or `defaultdict`) of integer lists.
pub fn as_int_list_dict(o: &Obj) -> PResult<Vec<(i64, Vec<i64>)>> {
    let v = o.borrow();
    let Value::Dict(entries) = &*v else { return err("expected a dict of lists") };
    entries
        .iter()
        .map(|(k, v)| {
            let key = as_int(k).ok_or_else(|| PickleError("non-integer dict key".into()))?;
            let items = tuple_items(v).ok_or_else(|| PickleError(format!("value for key {key} is not a list")))?;
            let ints = items.iter().map(as_int).collect::<Option<Vec<_>>>().ok_or_else(|| PickleError(format!("non-integer neighbour of {key}")))?;
            Ok((key, ints))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Streams are CPython `pickle.dumps` output unless noted.

    #[test]
    fn py3_list_of_ints() {
        // pickle.dumps([1, 300, -2, 70000], protocol=2)
        let data = b"\x80\x02]q\x00(K\x01M,\x01J\xfe\xff\xff\xffJp\x11\x01\x00e.";
        let o = load(data).unwrap();
        let items = tuple_items(&o).unwrap();
        let ints: Vec<i64> = items.iter().map(|i| as_int(i).unwrap()).collect();
        assert_eq!(ints, vec![1, 300, -2, 70000]);
    }

    #[test]
    fn dict_with_byte_and_text_keys() {
        // hand-assembled: {py2 str 'a': 1, u'b': [2]}
        let data = b"\x80\x02}q\x00(U\x01aK\x01X\x01\x00\x00\x00b]q\x01K\x02au.";
        let o = load(data).unwrap();
        assert_eq!(as_int(&dict_get(&o, "a").unwrap()), Some(1));
        assert!(dict_get(&o, "b").is_some());
    }

    #[test]
    fn memo_shares_mutations() {
        // l = []; [l, l]
        let data = b"\x80\x02]q\x00(]q\x01h\x01e.";
        let o = load(data).unwrap();
        let outer = tuple_items(&o).unwrap();
        assert_eq!(outer.len(), 2);
        assert!(Rc::ptr_eq(&outer[0], &outer[1]));
        // hand-assembled: same, then append 7 to the inner list via the memo
        let data = b"\x80\x02]q\x00(]q\x01h\x01eh\x01K\x07a0.";
        let o = load(data).unwrap();
        let outer = tuple_items(&o).unwrap();
        assert_eq!(tuple_items(&outer[1]).unwrap().len(), 1);
    }

    #[test]
    fn long1_and_floats() {
        // (1 << 32, 1.5)
        let data = b"\x80\x02\x8a\x05\x00\x00\x00\x00\x01G?\xf8\x00\x00\x00\x00\x00\x00\x86q\x00.";
        let t = tuple_items(&load(data).unwrap()).unwrap();
        assert_eq!(as_int(&t[0]), Some(1 << 32));
        assert!(matches!(&*t[1].borrow(), Value::Float(f) if *f == 1.5));
    }

    #[test]
    fn text_opcodes() {
        // (5, 'a\nb', 'café', 12), protocol 0
        let data = b"(I5\nVa\\u000ab\np0\nVcaf\xe9\np1\nI12\ntp2\n.";
        let t = tuple_items(&load(data).unwrap()).unwrap();
        assert_eq!(as_int(&t[0]), Some(5));
        assert_eq!(as_text(&t[1]).unwrap(), "a\nb");
        assert_eq!(as_text(&t[2]).unwrap(), "café");
        assert_eq!(as_int(&t[3]), Some(12));
        // hand-assembled Python 2 forms
        let data = b"(S'a\\nb\\x41'\nL12L\nt.";
        let t = tuple_items(&load(data).unwrap()).unwrap();
        assert_eq!(as_text(&t[0]).unwrap(), "a\nbA");
        assert_eq!(as_int(&t[1]), Some(12));
    }

    #[test]
    fn truncated_and_unknown() {
        assert!(load(b"\x80\x02]q").is_err());
        assert!(load(b"\x80\x02\xff.").is_err());
    }

    #[test]
    fn signed_little_endian() {
        assert_eq!(le_signed(&[0xff]).unwrap(), -1);
        assert_eq!(le_signed(&[0x00, 0x80]).unwrap(), -32768);
        assert_eq!(le_signed(&[]).unwrap(), 0);
        assert_eq!(le_signed(&[1, 0, 0, 0, 0, 0, 0, 0, 0]).unwrap(), 1);
        assert!(le_signed(&[0, 0, 0, 0, 0, 0, 0, 0, 1]).is_err());
    }
}
