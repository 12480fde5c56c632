from quillen_singularity.cli import main

main()
