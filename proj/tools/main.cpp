#include "squidemu/cli.hpp"

int main(int argc, char** argv)
{
    return squidemu::run_cli(argc, argv);
}
