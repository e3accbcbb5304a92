from setuptools import find_packages, setup

with open("README.md", "r", errors='ignore') as f:
    long_description = f.read()

with open('requirements.txt', 'r', encoding='utf-8', errors='ignore') as ff:
    required = ff.read().splitlines()

setup(
    name='riskboost',
    packages=find_packages(
        include=[
            'riskboost',
            'riskboost.Utils',
            'riskboost.PreProcessing',
            'riskboost.FeatureSelection',
            'riskboost.Models',
            'riskboost.Optimization',
            'riskboost.Evaluation',
            'riskboost.Statistics',
            'tests',
        ]
    ),
    entry_points={
        'console_scripts': [
            'riskboost = riskboost.__main__:main'
        ]
    },
    install_requires=required,
    extras_require={'test': ['pytest']},
    python_requires=">=3.8",
    version='1.0.0',
    license='BSD 2-Clause',
    description='Benchmarking of feature selection, logistic regression and tuned gradient-boosted trees for '
                'business credit-risk classification',
    long_description=long_description,
    long_description_content_type="text/markdown",
)
