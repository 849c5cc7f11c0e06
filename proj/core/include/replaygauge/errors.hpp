#pragma once

#include <stdexcept>
#include <string>

namespace replaygauge {

#define REPLAYGAUGE_DEFINE_ERROR(Name)                     \
  class Name : public std::runtime_error {                 \
   public:                                                 \
    explicit Name(const std::string& what)                 \
        : std::runtime_error(std::string(#Name ": ") + what) {} \
  }

REPLAYGAUGE_DEFINE_ERROR(MalformedRow);
REPLAYGAUGE_DEFINE_ERROR(NegativeDuration);
REPLAYGAUGE_DEFINE_ERROR(NegativeTimestamp);
REPLAYGAUGE_DEFINE_ERROR(EmptyLog);
REPLAYGAUGE_DEFINE_ERROR(UnknownFunction);
REPLAYGAUGE_DEFINE_ERROR(UnknownMode);
REPLAYGAUGE_DEFINE_ERROR(InconsistentInputs);
REPLAYGAUGE_DEFINE_ERROR(NonBinaryMatrix);
REPLAYGAUGE_DEFINE_ERROR(UnknownUser);
REPLAYGAUGE_DEFINE_ERROR(EmptyRatings);
REPLAYGAUGE_DEFINE_ERROR(InvalidHyperparameter);
REPLAYGAUGE_DEFINE_ERROR(NegativeCounts);
REPLAYGAUGE_DEFINE_ERROR(MissingClass);
REPLAYGAUGE_DEFINE_ERROR(ZeroDenominator);
REPLAYGAUGE_DEFINE_ERROR(NoEvaluableUsers);
REPLAYGAUGE_DEFINE_ERROR(InvalidConfig);
REPLAYGAUGE_DEFINE_ERROR(IoError);

#undef REPLAYGAUGE_DEFINE_ERROR

}  // namespace replaygauge
