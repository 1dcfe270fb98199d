#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "porestat/equivalence.hpp"
#include "porestat/gpd.hpp"
#include "porestat/largest_pore.hpp"
#include "porestat/threshold.hpp"

// Text formats shared by the command-line tool. Tables are comma-separated
// with a header row; '#' lines before the header carry provenance. Reports are
// INI-style sections of `key = value` lines. Every number is written in
// shortest round-trip form, so reading a file back reproduces the values
// exactly and equal inputs give byte-identical files.

namespace porestat {

std::string_view toolkit_version() noexcept;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

/// Canonical `key=value` lines of everything that determines a run's output.
/// Worker count is excluded because it never changes the result.
std::string config_echo(const Provenance& provenance);

/// fnv1a(config_echo(provenance)) as 16 hex digits.
std::string config_hash(const Provenance& provenance);

// Tail-fit report.
void write_fit_report(std::ostream& out, const TailFit& fit, std::string_view threshold_mode = {});
/// Throws IngestError naming the missing or malformed key.
TailFit read_fit_report(std::istream& in);
TailFit read_fit_report_file(const std::string& path);

void write_scan_table(std::ostream& out, const ThresholdScan& scan);
void write_qq_table(std::ostream& out, std::span<const QqPoint> points);

/// `# key=value` provenance block: version, config hash, and the echo.
void write_provenance(std::ostream& out, const Provenance& provenance);

/// Provenance, atom masses and mean as comments, then `edge_um,cdf` rows.
void write_distribution(std::ostream& out, const LargestPoreDistribution& dist);
/// Inverse of write_distribution (bin masses rebuilt from CDF differences).
LargestPoreDistribution read_distribution(std::istream& in);
LargestPoreDistribution read_distribution_file(const std::string& path);

void write_summary(std::ostream& out, const LargestPoreDistribution& dist);

/// `provenance` describes the shared configuration; its volume is ignored.
void write_sweep_table(std::ostream& out, std::span<const VolumeSummary> rows,
                       const Provenance& provenance);

void write_equivalence_table(std::ostream& out, std::span<const EquivalenceReport> reports);
void write_scatter_table(std::ostream& out, const ScatterTable& table);
void write_ks_matrix(std::ostream& out, std::span<const ModeKsRow> rows, const Provenance& provenance);

}  // namespace porestat
