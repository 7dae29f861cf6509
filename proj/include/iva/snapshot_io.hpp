#pragma once

#include "iva/catalog.hpp"

#include <filesystem>
#include <stdexcept>

namespace iva {

class SnapshotFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// On-disk layout version written by save_snapshot.
inline constexpr int kSnapshotLayoutVersion = 1;

/// Writes `dir/manifest.json`, `dir/dictionary.jsonl` and `dir/cves.jsonl`.
/// The directory is created if needed; existing files are replaced.
///
/// manifest.json:
///   {"format": "iva-catalog-snapshot", "layout_version": 1,
///    "snapshot_time": "...", "dictionary_entries": N, "cve_entries": M}
/// dictionary.jsonl, one object per line, in snapshot order:
///   {"deprecated": bool, "deprecated_by": uri|null, "deprecation_reason": str,
///    "formatted": fs|null, "title": str, "uri": uri}
/// cves.jsonl:
///   {"cvss_score": number|null, "id": str, "published": str, "summary": str,
///    "vuln_software": [uri, ...]}
/// Keys are written sorted, so identical snapshots produce identical bytes.
void save_snapshot(const CatalogSnapshot& snapshot, const std::filesystem::path& dir);

/// Throws SnapshotFormatError on a missing, unknown-version or corrupt layout.
CatalogSnapshot load_snapshot(const std::filesystem::path& dir);

} // namespace iva
