#pragma once

#include "iva/catalog.hpp"

#include <cstddef>
#include <functional>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iva {

/// I/O failure while reading a feed or dictionary.
class StreamError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The document is not well-formed XML.
class DocumentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Why one item was skipped during ingestion.
struct SkipDiagnostic {
    std::string item;   ///< name/id of the offending item, if known
    std::string reason;
};

struct DictionaryParseResult {
    std::vector<CpeDictEntry> entries;
    /// Number of cpe-item elements seen; entries.size() + skipped.size().
    std::size_t items_seen = 0;
    std::vector<SkipDiagnostic> skipped;
};

struct CveFeedParseResult {
    std::vector<CveEntry> entries;
    std::size_t entries_seen = 0;
    std::vector<SkipDiagnostic> skipped;
    /// Vulnerable-software URIs dropped from otherwise valid entries.
    std::vector<SkipDiagnostic> skipped_cpes;
};

/// Streams a CPE dictionary 2.3 XML document. Unparsable cpe-items are
/// skipped and reported; unknown elements are ignored.
DictionaryParseResult parse_cpe_dictionary(std::istream& source);

/// Streams an NVD CVE XML 2.0 feed. Entries with an empty vulnerable-software
/// list are kept.
CveFeedParseResult parse_cve_feed(std::istream& source);

struct IngestReport {
    std::size_t dictionary_items = 0;
    std::size_t dictionary_entries = 0;
    std::size_t cve_entries_seen = 0;
    std::size_t cve_entries = 0;
    /// Skipped dictionary items, feed entries and vulnerable-software URIs.
    std::vector<SkipDiagnostic> skipped;
};

/// Parses one dictionary and any number of CVE feed documents and builds a
/// snapshot from them. Throws DocumentError or DuplicateCveId.
CatalogSnapshot ingest_documents(std::string_view dictionary_xml, std::span<const std::string> feed_xmls,
                                 std::string snapshot_time, IngestReport* report = nullptr);

} // namespace iva
