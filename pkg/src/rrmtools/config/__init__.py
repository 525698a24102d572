from rrmtools.config.run_config import CONFIG_FOLDER_ENV, RUN_CONFIG_VERSION, RunConfig, locate_config_file
