//! Tar archive parsing over raw byte streams.
//!
//! The parser keeps the archive bytes exactly as stored and records, for each
//! entry, which byte spans are header and content. Every offset of the archive
//! is attributable to exactly one of: an entry header, entry content,
//! block padding after content, or the end-of-archive trailer. PAX extended
//! headers and GNU long-name records are folded into the header span of the
//! entry they describe, which keeps that partition exhaustive.
//!
//! Only uncompressed POSIX ustar / GNU tar input is accepted; compressed
//! archives must be decompressed upstream.

mod builder;

pub use builder::ArchiveBuilder;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tar block size in bytes.
pub const BLOCK: u64 = 512;

/// A contiguous byte span within an archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub offset: u64,
    pub length: u64,
}

impl Span {
    pub fn new(offset: u64, length: u64) -> Self {
        Self { offset, length }
    }

    #[inline]
    pub fn end(&self) -> u64 {
        self.offset + self.length
    }

    #[inline]
    pub fn contains(&self, offset: u64) -> bool {
        offset >= self.offset && offset < self.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Regular,
    Directory,
    Link,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub header_span: Span,
    pub content_span: Span,
    pub declared_size: u64,
    pub kind: EntryKind,
}

impl FileEntry {
    /// End of this entry's region including block padding after the content.
    pub fn padded_end(&self) -> u64 {
        round_up(self.content_span.end(), BLOCK)
    }

    /// Header start through padded content end.
    pub fn unit_span(&self) -> Span {
        Span::new(
            self.header_span.offset,
            self.padded_end() - self.header_span.offset,
        )
    }
}

/// Region classification for a byte offset, see [`TarStream::locate_offset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Header,
    Content,
    Padding,
    Trailer,
}

/// Result of resolving a byte offset to its owning entry and region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Located<'a> {
    /// Owning entry path; padding is attributed to the preceding entry,
    /// the trailer to none.
    pub path: Option<&'a str>,
    pub region: Region,
}

/// A parsed tar archive: the raw bytes plus the ordered entry map.
#[derive(Debug, Clone)]
pub struct TarStream {
    raw: Vec<u8>,
    entries: Vec<FileEntry>,
    trailer_start: u64,
}

/// Parse an uncompressed tar archive. See [`TarStream::parse`].
pub fn parse_tar(bytes: Vec<u8>) -> Result<TarStream> {
    TarStream::parse(bytes)
}

impl TarStream {
    pub fn parse(bytes: Vec<u8>) -> Result<Self> {
        let len = bytes.len() as u64;
        if len % BLOCK != 0 {
            return Err(Error::TarTruncated {
                expected: round_up(len, BLOCK),
                actual: len,
            });
        }

        let mut entries = Vec::new();
        let mut offset = 0u64;
        // First meta block (PAX / GNU long name) of the entry being assembled.
        let mut pending_header_start: Option<u64> = None;
        let mut pending_path: Option<String> = None;
        let mut trailer_start = len;

        while offset < len {
            let block = &bytes[offset as usize..(offset + BLOCK) as usize];
            if block.iter().all(|&b| b == 0) {
                if pending_header_start.is_some() {
                    return Err(Error::TarMalformed {
                        offset,
                        reason: "extended header not followed by an entry".into(),
                    });
                }
                // The trailer runs to the end of the archive; anything
                // non-zero after it is malformed.
                if let Some(pos) = bytes[offset as usize..].iter().position(|&b| b != 0) {
                    return Err(Error::TarMalformed {
                        offset: offset + pos as u64,
                        reason: "non-zero bytes after end-of-archive zero block".into(),
                    });
                }
                trailer_start = offset;
                break;
            }

            verify_checksum(block, offset)?;
            let size = parse_size(&block[124..136]).ok_or_else(|| Error::TarMalformed {
                offset,
                reason: "unparseable size field".into(),
            })?;
            let data_end = offset + BLOCK + size;
            let padded_end = round_up(data_end, BLOCK);
            if padded_end > len {
                return Err(Error::TarTruncated {
                    expected: padded_end,
                    actual: len,
                });
            }

            let typeflag = block[156];
            match typeflag {
                // PAX per-file / global headers and GNU long name / long link
                // records describe the entry that follows; their blocks count
                // as that entry's header bytes.
                b'x' | b'g' | b'L' | b'K' => {
                    pending_header_start.get_or_insert(offset);
                    let data = &bytes[(offset + BLOCK) as usize..data_end as usize];
                    match typeflag {
                        b'x' => {
                            if let Some(p) = parse_pax_path(data, offset)? {
                                pending_path = Some(p);
                            }
                        }
                        b'L' => {
                            let trimmed = trim_nul(data);
                            pending_path = Some(String::from_utf8_lossy(trimmed).into_owned());
                        }
                        // Global PAX data and long-link targets are consumed
                        // but not applied.
                        _ => {}
                    }
                    offset = padded_end;
                }
                _ => {
                    let header_start = pending_header_start.take().unwrap_or(offset);
                    let path = pending_path
                        .take()
                        .unwrap_or_else(|| header_name(block));
                    let kind = match typeflag {
                        0 | b'0' | b'7' => EntryKind::Regular,
                        b'5' => EntryKind::Directory,
                        b'1' | b'2' => EntryKind::Link,
                        _ => EntryKind::Other,
                    };
                    entries.push(FileEntry {
                        path,
                        header_span: Span::new(header_start, offset + BLOCK - header_start),
                        content_span: Span::new(offset + BLOCK, size),
                        declared_size: size,
                        kind,
                    });
                    offset = padded_end;
                }
            }
        }

        if pending_header_start.is_some() {
            return Err(Error::TarTruncated {
                expected: offset + BLOCK,
                actual: len,
            });
        }

        Ok(Self {
            raw: bytes,
            entries,
            trailer_start,
        })
    }

    #[inline]
    pub fn raw_bytes(&self) -> &[u8] {
        &self.raw
    }

    #[inline]
    pub fn entries(&self) -> &[FileEntry] {
        &self.entries
    }

    #[inline]
    pub fn total_len(&self) -> u64 {
        self.raw.len() as u64
    }

    /// Offset of the first end-of-archive zero block.
    #[inline]
    pub fn trailer_start(&self) -> u64 {
        self.trailer_start
    }

    /// Content bytes of entry `index`.
    pub fn entry_content(&self, index: usize) -> &[u8] {
        let span = self.entries[index].content_span;
        &self.raw[span.offset as usize..span.end() as usize]
    }

    /// Raw bytes of entry `index` from header start through padded content end.
    pub fn entry_unit(&self, index: usize) -> &[u8] {
        let span = self.entries[index].unit_span();
        &self.raw[span.offset as usize..span.end() as usize]
    }

    pub fn entry_by_path(&self, path: &str) -> Option<(usize, &FileEntry)> {
        self.entries
            .iter()
            .enumerate()
            .find(|(_, e)| e.path == path)
    }

    /// Resolve the entry and region covering a byte offset.
    pub fn locate_offset(&self, offset: u64) -> Result<Located<'_>> {
        if offset >= self.total_len() {
            return Err(Error::OffsetOutOfRange {
                offset,
                len: self.total_len(),
            });
        }
        if offset >= self.trailer_start {
            return Ok(Located {
                path: None,
                region: Region::Trailer,
            });
        }
        let idx = match self
            .entries
            .binary_search_by(|e| e.header_span.offset.cmp(&offset))
        {
            Ok(i) => i,
            Err(0) => unreachable!("entries start at offset 0"),
            Err(i) => i - 1,
        };
        let entry = &self.entries[idx];
        let region = if entry.header_span.contains(offset) {
            Region::Header
        } else if entry.content_span.contains(offset) {
            Region::Content
        } else {
            Region::Padding
        };
        Ok(Located {
            path: Some(&entry.path),
            region,
        })
    }

    /// Reserialize the archive with entries in permuted order. Each entry's
    /// header + content + padding bytes are copied verbatim; the identity
    /// permutation reproduces the input exactly.
    pub fn permute_files(&self, perm: &[usize]) -> Result<Vec<u8>> {
        if perm.len() != self.entries.len() {
            return Err(Error::InvalidPermutation {
                reason: format!(
                    "length {} does not match entry count {}",
                    perm.len(),
                    self.entries.len()
                ),
            });
        }
        let mut seen = vec![false; perm.len()];
        for &i in perm {
            if i >= perm.len() || seen[i] {
                return Err(Error::InvalidPermutation {
                    reason: format!("index {i} repeated or out of range"),
                });
            }
            seen[i] = true;
        }
        let mut out = Vec::with_capacity(self.raw.len());
        for &i in perm {
            out.extend_from_slice(self.entry_unit(i));
        }
        out.extend_from_slice(&self.raw[self.trailer_start as usize..]);
        Ok(out)
    }

    /// One JSON object per entry, for the `--entries` listing output.
    pub fn entry_listing_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let line = serde_json::json!({
                "path": e.path,
                "header_offset": e.header_span.offset,
                "header_length": e.header_span.length,
                "content_offset": e.content_span.offset,
                "content_length": e.content_span.length,
                "size": e.declared_size,
                "kind": e.kind,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

#[inline]
fn round_up(v: u64, to: u64) -> u64 {
    v.div_ceil(to) * to
}

fn verify_checksum(block: &[u8], offset: u64) -> Result<()> {
    let stored = parse_octal(&block[148..156]).ok_or_else(|| Error::TarMalformed {
        offset,
        reason: "unparseable checksum field".into(),
    })? as u32;
    let computed: u32 = block
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            if (148..156).contains(&i) {
                b' ' as u32
            } else {
                u32::from(b)
            }
        })
        .sum();
    if stored != computed {
        return Err(Error::TarChecksum {
            offset,
            stored,
            computed,
        });
    }
    Ok(())
}

/// Size field: NUL/space-padded octal, or GNU base-256 when the high bit of
/// the first byte is set.
fn parse_size(field: &[u8]) -> Option<u64> {
    if field[0] & 0x80 != 0 {
        let mut v: u64 = u64::from(field[0] & 0x7f);
        for &b in &field[1..] {
            v = v.checked_mul(256)?.checked_add(u64::from(b))?;
        }
        return Some(v);
    }
    parse_octal(field)
}

fn parse_octal(field: &[u8]) -> Option<u64> {
    let mut i = 0;
    while i < field.len() && (field[i] == 0 || field[i] == b' ') {
        i += 1;
    }
    let mut v: u64 = 0;
    let mut digits = 0;
    while i < field.len() && (b'0'..=b'7').contains(&field[i]) {
        v = v.checked_mul(8)?.checked_add(u64::from(field[i] - b'0'))?;
        i += 1;
        digits += 1;
    }
    // Remaining bytes must be padding.
    while i < field.len() {
        if field[i] != 0 && field[i] != b' ' {
            return None;
        }
        i += 1;
    }
    if digits == 0 {
        // All-padding size fields occur in some writers and mean zero.
        return Some(0);
    }
    Some(v)
}

fn trim_nul(bytes: &[u8]) -> &[u8] {
    let end = bytes.iter().position(|&b| b == 0).unwrap_or(bytes.len());
    &bytes[..end]
}

fn header_name(block: &[u8]) -> String {
    let name = trim_nul(&block[0..100]);
    let prefix = if &block[257..262] == b"ustar" {
        trim_nul(&block[345..500])
    } else {
        &[]
    };
    if prefix.is_empty() {
        String::from_utf8_lossy(name).into_owned()
    } else {
        let mut s = String::from_utf8_lossy(prefix).into_owned();
        s.push('/');
        s.push_str(&String::from_utf8_lossy(name));
        s
    }
}

/// Extract the `path` record from a PAX header payload.
fn parse_pax_path(data: &[u8], block_offset: u64) -> Result<Option<String>> {
    let mut rest = data;
    let mut path = None;
    while !rest.is_empty() {
        let space = rest
            .iter()
            .position(|&b| b == b' ')
            .ok_or_else(|| Error::TarMalformed {
                offset: block_offset,
                reason: "pax record missing length delimiter".into(),
            })?;
        let rec_len: usize = std::str::from_utf8(&rest[..space])
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|&n| n > space && n <= rest.len())
            .ok_or_else(|| Error::TarMalformed {
                offset: block_offset,
                reason: "pax record has invalid length".into(),
            })?;
        let body = &rest[space + 1..rec_len];
        let body = body.strip_suffix(b"\n").unwrap_or(body);
        if let Some(eq) = body.iter().position(|&b| b == b'=') {
            if &body[..eq] == b"path" {
                path = Some(String::from_utf8_lossy(&body[eq + 1..]).into_owned());
            }
        }
        rest = &rest[rec_len..];
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_archive_is_all_trailer() {
        let stream = TarStream::parse(vec![0u8; 1024]).unwrap();
        assert!(stream.entries().is_empty());
        assert_eq!(stream.total_len(), 1024);
        assert_eq!(stream.trailer_start(), 0);
        assert_eq!(
            stream.locate_offset(0).unwrap(),
            Located {
                path: None,
                region: Region::Trailer
            }
        );
    }

    #[test]
    fn builder_archive_round_trips() {
        let mut b = ArchiveBuilder::new();
        b.add_file("a.txt", b"abc").unwrap();
        let bytes = b.finish();
        let stream = TarStream::parse(bytes).unwrap();
        assert_eq!(stream.entries().len(), 1);
        let e = &stream.entries()[0];
        assert_eq!(e.path, "a.txt");
        assert_eq!(e.header_span, Span::new(0, 512));
        assert_eq!(e.content_span, Span::new(512, 3));
        assert_eq!(e.kind, EntryKind::Regular);
        // header + content + 509 padding + 1024 trailer
        assert_eq!(stream.total_len(), 2048);
        assert_eq!(stream.trailer_start(), 1024);
    }

    #[test]
    fn locate_offset_regions() {
        let mut b = ArchiveBuilder::new();
        b.add_file("a.txt", b"abc").unwrap();
        let stream = TarStream::parse(b.finish()).unwrap();
        let at = |o: u64| stream.locate_offset(o).unwrap();
        assert_eq!(at(0), Located { path: Some("a.txt"), region: Region::Header });
        assert_eq!(at(512), Located { path: Some("a.txt"), region: Region::Content });
        assert_eq!(at(514), Located { path: Some("a.txt"), region: Region::Content });
        // Content ends at 515; 516 is block padding of the same entry.
        assert_eq!(at(516), Located { path: Some("a.txt"), region: Region::Padding });
        assert_eq!(at(1024), Located { path: None, region: Region::Trailer });
        assert!(stream.locate_offset(2048).is_err());
    }

    #[test]
    fn second_entry_offset_after_padded_first() {
        let mut b = ArchiveBuilder::new();
        b.add_file("f1", &[7u8; 600]).unwrap();
        b.add_file("f2", &[9u8; 10]).unwrap();
        let stream = TarStream::parse(b.finish()).unwrap();
        // 600 bytes of content pad to 1024, so f2's header begins at 1536.
        assert_eq!(stream.entries()[1].header_span.offset, 512 + 1024);
        assert_eq!(stream.entries()[1].content_span.offset, 1536 + 512);
    }

    #[test]
    fn checksum_corruption_reports_block_offset() {
        let mut b = ArchiveBuilder::new();
        b.add_file("f1", &[7u8; 600]).unwrap();
        b.add_file("f2", &[9u8; 10]).unwrap();
        let mut bytes = b.finish();
        bytes[1536] ^= 0xff; // corrupt f2's header
        match TarStream::parse(bytes) {
            Err(Error::TarChecksum { offset, .. }) => assert_eq!(offset, 1536),
            other => panic!("expected checksum error, got {other:?}"),
        }
    }

    #[test]
    fn truncation_reports_expected_and_actual() {
        let mut b = ArchiveBuilder::new();
        b.add_file("a", &[1u8; 700]).unwrap();
        let bytes = b.finish();
        let cut = bytes[..1024].to_vec(); // drop half the content
        match TarStream::parse(cut) {
            Err(Error::TarTruncated { expected, actual }) => {
                assert_eq!(expected, 512 + 1024);
                assert_eq!(actual, 1024);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
        match TarStream::parse(vec![0u8; 700]) {
            Err(Error::TarTruncated { expected, actual }) => {
                assert_eq!(expected, 1024);
                assert_eq!(actual, 700);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn identity_permutation_reproduces_bytes() {
        let mut b = ArchiveBuilder::new();
        b.add_file("x", &[1u8; 100]).unwrap();
        b.add_file("y", &[2u8; 600]).unwrap();
        b.add_dir("d/").unwrap();
        let bytes = b.finish();
        let stream = TarStream::parse(bytes.clone()).unwrap();
        assert_eq!(stream.permute_files(&[0, 1, 2]).unwrap(), bytes);
    }

    #[test]
    fn permutation_relocates_entries() {
        let mut b = ArchiveBuilder::new();
        b.add_file("x", &[1u8; 100]).unwrap();
        b.add_file("y", &[2u8; 100]).unwrap();
        b.add_file("z", &[3u8; 700]).unwrap();
        let bytes = b.finish();
        let stream = TarStream::parse(bytes.clone()).unwrap();
        let permuted = stream.permute_files(&[2, 0, 1]).unwrap();
        assert_eq!(permuted.len(), bytes.len());
        let reparsed = TarStream::parse(permuted).unwrap();
        let paths: Vec<_> = reparsed.entries().iter().map(|e| e.path.as_str()).collect();
        assert_eq!(paths, vec!["z", "x", "y"]);
        // Relocated units are byte-identical.
        assert_eq!(reparsed.entry_unit(0), stream.entry_unit(2));
    }

    #[test]
    fn invalid_permutations_rejected() {
        let mut b = ArchiveBuilder::new();
        b.add_file("x", b"1").unwrap();
        b.add_file("y", b"2").unwrap();
        let stream = TarStream::parse(b.finish()).unwrap();
        assert!(stream.permute_files(&[0]).is_err());
        assert!(stream.permute_files(&[0, 0]).is_err());
        assert!(stream.permute_files(&[0, 2]).is_err());
    }

    #[test]
    fn coverage_partition_is_exhaustive() {
        let mut b = ArchiveBuilder::new();
        b.add_file("a", &[1u8; 777]).unwrap();
        b.add_dir("d/").unwrap();
        b.add_file("d/b", &[2u8; 10]).unwrap();
        let stream = TarStream::parse(b.finish()).unwrap();
        let mut covered = 0u64;
        for e in stream.entries() {
            covered += e.unit_span().length;
        }
        covered += stream.total_len() - stream.trailer_start();
        assert_eq!(covered, stream.total_len());
        assert_eq!(stream.total_len() % BLOCK, 0);
        // locate_offset agrees with the content spans.
        for e in stream.entries() {
            for off in e.content_span.offset..e.content_span.end() {
                let loc = stream.locate_offset(off).unwrap();
                assert_eq!(loc.path, Some(e.path.as_str()));
                assert_eq!(loc.region, Region::Content);
            }
        }
    }

    #[test]
    fn directories_have_empty_content() {
        let mut b = ArchiveBuilder::new();
        b.add_dir("d/").unwrap();
        let stream = TarStream::parse(b.finish()).unwrap();
        let e = &stream.entries()[0];
        assert_eq!(e.kind, EntryKind::Directory);
        assert_eq!(e.content_span.length, 0);
        assert_eq!(e.content_span.offset, e.header_span.end());
    }
}
