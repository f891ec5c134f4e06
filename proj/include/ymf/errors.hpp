#pragma once

#include <stdexcept>
#include <string>

namespace ymf {

/// Violation of an operation contract. Carries the owning module and the
/// contract that failed so that the CLI can render a structured message.
class ContractError : public std::runtime_error
{
public:
  ContractError(std::string module, std::string contract, const std::string &what)
    : std::runtime_error(module + "::" + contract + ": " + what)
    , module_(std::move(module))
    , contract_(std::move(contract))
  {}

  const std::string &module() const noexcept { return module_; }
  const std::string &contract() const noexcept { return contract_; }

private:
  std::string module_;
  std::string contract_;
};

} // namespace ymf
