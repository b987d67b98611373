#include "earthworks/common.hpp"

namespace earthworks {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::SelfIntersectingRing: return "self_intersecting_ring";
    case ErrorCode::EmptyDigMask: return "empty_dig_mask";
    case ErrorCode::InsufficientData: return "insufficient_data";
    case ErrorCode::AllSentinel: return "all_sentinel";
    case ErrorCode::UnreachableNode: return "unreachable_node";
    case ErrorCode::NoFeasibleCornerSequence: return "no_feasible_corner_sequence";
    case ErrorCode::NoFeasiblePlan: return "no_feasible_plan";
    case ErrorCode::AttackOutOfBounds: return "attack_out_of_bounds";
    case ErrorCode::DumpDeadlock: return "dump_deadlock";
    case ErrorCode::ZoneInactive: return "zone_inactive";
    case ErrorCode::PathNotFound: return "path_not_found";
    case ErrorCode::ReplanRequired: return "replan_required";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

// splitmix64 finalizer
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace earthworks
