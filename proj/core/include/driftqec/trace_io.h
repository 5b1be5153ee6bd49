#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "driftqec/drift.h"

namespace driftqec {

/// `time_s,dfr`
void write_dfr_trace_csv(std::ostream &out, const DfrTrace &trace);
DfrTrace read_dfr_trace_csv(std::istream &in, double cycle_time);

/// `time_s,ler`
void write_ler_trace_csv(std::ostream &out, const LerTrace &trace);
LerTrace read_ler_trace_csv(std::istream &in);

/// `round,fired_count,total_detectors`. Rounds must be consecutive from 0.
std::vector<RoundCount> read_round_counts_csv(std::istream &in);

/// Binary detector counts: the 8-byte magic "DQECRND1" followed by
/// little-endian (uint32 fired, uint32 total) pairs, one per round.
std::vector<RoundCount> read_round_counts_binary(std::istream &in);
void write_round_counts_binary(std::ostream &out, const std::vector<RoundCount> &rounds);

/// Picks the reader from the first bytes of the file.
std::vector<RoundCount> read_round_counts_file(const std::string &path);

}  // namespace driftqec
