#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "archrecon/diagram.hpp"
#include "archrecon/gateway.hpp"
#include "archrecon/grouper.hpp"
#include "archrecon/readme.hpp"
#include "archrecon/ref_index.hpp"
#include "archrecon/summarizer.hpp"

namespace archrecon {

struct ArchitectConfig {
  std::uint32_t max_output_tokens = 4096;
  std::size_t max_symbols_per_file = 60;
};

// The gen-diagram request for one group: the README as global context, the
// group's summaries (with function counts and names from `graph` when
// given) and file-projection edges between the group's files.
LlmRequest partial_request(const Group& group, const std::vector<FileSummary>& summaries,
                           const ReadmeDoc& readme, const ReferenceGraph* graph,
                           std::uint64_t context_tokens, const ArchitectConfig& config = {},
                           std::string_view repair = {});

// Per-file prompt mass of a gen-diagram request: the file's FILES line plus
// every DEPENDENCIES line it could contribute. Grouping over these weights
// keeps each group's request within the budget whatever the README size.
TokenWeights partial_weights(const std::vector<FileSummary>& summaries, const ReferenceGraph* graph,
                             const ArchitectConfig& config = {});

// Throws Error{Precondition} for an empty group or a file without summary,
// Error{DiagramParseFailure} when the reply is still not a usable flowchart
// after one repair attempt; gateway errors propagate.
PartialDiagram generate_partial(const Group& group, const std::vector<FileSummary>& summaries,
                                const ReadmeDoc& readme, Gateway& gateway,
                                const ReferenceGraph* graph = nullptr,
                                const ArchitectConfig& config = {},
                                std::vector<std::string>* diagnostics = nullptr);

// One partial per group, up to the gateway's concurrency at once, in group
// order.
std::vector<PartialDiagram> generate_partials(const GroupPlan& plan,
                                              const std::vector<FileSummary>& summaries,
                                              const ReadmeDoc& readme, Gateway& gateway,
                                              const ReferenceGraph* graph = nullptr,
                                              const ArchitectConfig& config = {},
                                              std::vector<std::string>* diagnostics = nullptr);

}  // namespace archrecon
