#include <exception>
#include <iostream>

#include "nematic/config.hpp"
#include "nematic/driver.hpp"
#include "nematic/errors.hpp"

using namespace nematic;

namespace {

void diagnostic(const char* kind, const std::string& message, Subcommand sub) {
  Json j{{"error", kind}, {"message", message}, {"subcommand", to_string(sub)}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  try {
    cfg = parse_config(argc, argv);
  } catch (const HelpRequest& h) {
    std::cout << h.what();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "nematic: " << e.what() << "\n";
    return 2;
  }
  try {
    const RunResult res = execute(cfg);
    for (const std::string& f : res.files) std::cout << f << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "nematic: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "nematic: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    diagnostic("numerical", e.what(), cfg.subcommand);
    return 3;
  } catch (const std::exception& e) {
    diagnostic("internal", e.what(), cfg.subcommand);
    return 3;
  }
}
