#ifndef CCTSENS_ERRORS_HPP
#define CCTSENS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cctsens {

// Base for all library errors. `name()` is the stable machine-readable
// identifier printed by the CLI on the diagnostic stream.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

#define CCTSENS_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  }

CCTSENS_DEFINE_ERROR(NoConvergence);
CCTSENS_DEFINE_ERROR(SingularJacobian);
CCTSENS_DEFINE_ERROR(NotOnBoundary);
CCTSENS_DEFINE_ERROR(InvalidParameter);
CCTSENS_DEFINE_ERROR(DimensionMismatch);
CCTSENS_DEFINE_ERROR(ScenarioRejected);
CCTSENS_DEFINE_ERROR(StepFailure);
CCTSENS_DEFINE_ERROR(NoFeasibleExit);
CCTSENS_DEFINE_ERROR(BracketFailure);
CCTSENS_DEFINE_ERROR(CuepNotType1);
CCTSENS_DEFINE_ERROR(Ambiguous);
CCTSENS_DEFINE_ERROR(NonTransversal);
CCTSENS_DEFINE_ERROR(EigenFailure);
CCTSENS_DEFINE_ERROR(CategoryChanged);
CCTSENS_DEFINE_ERROR(DimensionUnsupported);
CCTSENS_DEFINE_ERROR(ParseError);

#undef CCTSENS_DEFINE_ERROR

}  // namespace cctsens

#endif  // CCTSENS_ERRORS_HPP
