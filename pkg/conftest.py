import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'lightcone.settings')
django.setup()
