#include "toprank/common.hpp"

namespace toprank {

std::string variant_name(LossVariant v) {
  switch (v) {
    case LossVariant::Top:
      return "top";
    case LossVariant::TopRej:
      return "toprej";
    case LossVariant::TopLOF:
      return "toplof";
    case LossVariant::TopRejLOF:
      return "toprejlof";
  }
  throw std::invalid_argument("variant_name: unknown variant");
}

LossVariant parse_variant(const std::string& name) {
  if (name == "top") return LossVariant::Top;
  if (name == "toprej") return LossVariant::TopRej;
  if (name == "toplof") return LossVariant::TopLOF;
  if (name == "toprejlof") return LossVariant::TopRejLOF;
  throw std::invalid_argument("unknown loss variant '" + name +
                              "' (expected top|toprej|toplof|toprejlof)");
}

}  // namespace toprank
