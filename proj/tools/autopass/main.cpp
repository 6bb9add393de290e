#include <autopass/app.hpp>

int main(int argc, char** argv) { return autopass::app::run_cli(argc, argv); }
